"""Evaluation toolkit for spoofing countermeasures and spoofing-robust speaker verification.

Track 1 scores a standalone countermeasure (minDCF, actDCF, Cllr, EER);
Track 2 scores spoofing-robust ASV (min a-DCF, t-DCF, t-EER).  Calibration
diagnostics, condition breakdowns, leaderboards and a synthetic score
generator round it out.
"""

__version__ = "0.1.0"
