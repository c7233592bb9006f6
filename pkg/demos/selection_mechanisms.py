"""
Selecting among candidates with uneven sensitivities
====================================================

Two candidates: a good one whose score barely moves between neighbours, and a
bad one whose score can move by 100. The plain exponential mechanism has to
use the larger sensitivity for both and picks the bad one often. Normalising
each score by its own sensitivity fixes that.
"""

import numpy as np

from nodedp.mechanisms import (
    CandidateSet,
    PrivacyParams,
    RandomSource,
    exponential_mechanism_min,
    gem_temperature,
    generalized_exponential_mechanism,
    normalized_scores,
)

q = np.array([0.0, 100.0])
d = np.array([1.0, 100.0])
params = PrivacyParams(1.0, beta=0.1)

t = gem_temperature(2, params)
print("temperature", t)
print("normalized scores", normalized_scores(CandidateSet(q, d), t))

src = RandomSource(0)
em = [exponential_mechanism_min(CandidateSet(q, 100.0), 1.0, src) for _ in range(10_000)]
gem = [generalized_exponential_mechanism(CandidateSet(q, d), params, src) for _ in range(10_000)]
print("plain mechanism picks the bad candidate", np.mean(em))
print("normalized mechanism picks the bad candidate", np.mean(gem))
