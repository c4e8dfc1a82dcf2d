"""Toolkit for building, training and evaluating a legal-meaning-preservation
metric for French sentence pairs: corpus construction, human annotation
scoring and agreement, sanity-check pair mining, sentence-pair regression,
and metric meta-evaluation."""

__version__ = "0.1.0"
