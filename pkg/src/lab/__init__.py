# Sensitivity and recourse measurement
