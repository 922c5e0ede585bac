#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

derived seeds
"""
from pytest import raises

from laserinsert.errors import InvalidArgumentError
from laserinsert.seeds import derive_seed


def test_streams_are_stable_and_distinct():
    assert derive_seed(2026, 0, 1) == derive_seed(2026, 0, 1)
    seeds = {derive_seed(2026, index, trial)
             for index in range(10) for trial in range(10)}
    assert len(seeds) == 100
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert 0 <= derive_seed(5) < 2 ** 32


def test_negative_entropy():
    with raises(InvalidArgumentError):
        derive_seed(1, -1)
