"""
entlab: entropy laboratory for quantized hyperbolic torus automorphisms
"""
