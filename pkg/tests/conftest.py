"""Configuration for test environment"""
from .fixtures import *
