"""Allow ``python -m repelling_walks``."""

from .cli import main

raise SystemExit(main())
