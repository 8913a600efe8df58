"""
squeezelab - Polarization-squeezed vacuum simulator and estimators
"""

__version__ = "0.1.0"
__author__ = "squeezelab developers"
