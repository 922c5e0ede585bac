#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Wed Oct 14 2026

derived random seeds
"""
import numpy as np

from .errors import InvalidArgumentError


def derive_seed(*entropy: int) -> int:
    """Independent 32 bit seed for the stream identified by entropy, e.g.
    (master, initial index, trial) or (seed, outer loop).
    """
    if any(value < 0 for value in entropy):
        raise InvalidArgumentError("Seed entropy must not be negative.")
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])
