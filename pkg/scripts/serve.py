#!/usr/bin/env python3
"""Run the seqbox HTTP service.

    python scripts/serve.py [--host 127.0.0.1] [--port 8000]

The browser frontend in frontend/ talks to this API.
"""

import argparse
from pathlib import Path

import uvicorn

from seqbox.service import create_app


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument(
        "--frontend",
        default=str(Path(__file__).resolve().parent.parent / "frontend"),
        help="directory with index.html and dist/ (build with: cd frontend && npm run build)",
    )
    args = parser.parse_args()
    frontend = args.frontend if Path(args.frontend, "index.html").exists() else None
    uvicorn.run(create_app(frontend_dir=frontend), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
