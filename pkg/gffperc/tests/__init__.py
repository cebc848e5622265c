from gffperc.cli import setup

setup()
