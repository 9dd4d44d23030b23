#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""python -m dimer 入口"""

import sys

from .cli import main

sys.exit(main())
