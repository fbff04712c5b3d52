# Stable-on-average knapsack algorithms and sensitivity lab
