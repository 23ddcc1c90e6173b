"""Punto de entrada de la CLI: python cli.py verify --config run.json"""
import sys

from app.src.cli import main

if __name__ == "__main__":
    sys.exit(main())
