"""
Detection metrics: DET, EER, minDCF and blacklist Top-S / Top-1 EER.
"""
