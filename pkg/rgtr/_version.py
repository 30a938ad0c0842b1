
# This file is automatically generated by setup.py.
__version__ = '0.1.0'
__sha__ = 'g0000000'
__revision__ = 'g0000000'
