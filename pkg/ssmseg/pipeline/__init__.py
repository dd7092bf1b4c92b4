# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Pipeline stages: audio I/O, MFCC, self-similarity, refinement, labeling and evaluation."""
