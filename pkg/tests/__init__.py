# Test package for the stable knapsack toolkit
