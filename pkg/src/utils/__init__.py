# Utility functions for the stable knapsack package
