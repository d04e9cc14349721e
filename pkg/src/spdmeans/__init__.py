"""Means of symmetric positive definite matrices and operator inequalities
under unital positive linear maps."""

from .errors import (DimMismatch, DomainError, HypothesisViolation, InvalidMap, InvalidT,
                     InvalidWeights, MatrixFormatError, NoConvergence, NotDefinite,
                     NotSymmetric, SpdMeansError)
from .kantorovich import K, K_half, kantorovich
from .means import (MeanResult, alm_mean, arithmetic_mean, geo_mean, harmonic_mean,
                    karcher_mean, karcher_residual, power_mean, power_mean_residual)
from .symmat import (DEFAULT_CONFIG, EigenDecomp, NumericConfig, apply_fn, eig_sym, expm,
                     inv, invsqrtm, logm, loewner_geq, loewner_margin, powm, sqrtm)
from .thompson import big_R, dist, rel_sup

__version__ = "0.1.0"
