"""
Numerical library: linear algebra kernel, classical dynamics, quantization,
quantum partitions, entropies and the entropic uncertainty principle
"""
