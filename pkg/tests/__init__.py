"""
Test package for the revival gravimetry engine.
"""
