# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import sys

from ssmseg.cli import main

if __name__ == "__main__":
    sys.exit(main())
