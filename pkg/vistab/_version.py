__version__ = '0.3.dev0'
__lastupdate__ = '19Oct2026'
