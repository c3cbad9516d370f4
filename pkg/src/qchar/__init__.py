"""Quantized characters, representation-ring weights, and finite KMS / fluctuation models."""
