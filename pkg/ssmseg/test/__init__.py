# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0
