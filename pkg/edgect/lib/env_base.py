# Copyright (c) 2017, Neil Booth
# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Class for configuration taken from a key-value source, with defaults.'''

from os import environ

from edgect.lib.util import class_logger


def parse_config_text(text):
    '''Parse flat "KEY = value" lines into a dict with upper-case keys.

    Blank lines and lines starting with # are ignored.  A key given
    twice is an error.'''
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        key = key.strip().upper()
        if not sep or not key:
            raise EnvBase.Error(f'line {line_no}: expected KEY = value, got "{line}"')
        if key in values:
            raise EnvBase.Error(f'line {line_no}: duplicate key {key}')
        values[key] = value.strip()
    return values


def read_config_file(path):
    '''Read and parse a config file.  OSError propagates.'''
    with open(path, 'r') as f:
        return parse_config_text(f.read())


class EnvBase(object):
    '''Wraps a mapping of configuration values.

    Values are looked up in the mapping given to the constructor first,
    then in the process environment.'''

    class Error(Exception):
        pass

    def __init__(self, values=None):
        self.logger = class_logger(__name__, self.__class__.__name__)
        self.values = dict(values or {})
        self.loop_policy = self.event_loop_policy()

    def lookup(self, key):
        value = self.values.get(key)
        if value is None:
            value = environ.get(key)
        return value

    def default(self, key, default):
        value = self.lookup(key)
        return default if value is None else value

    def boolean(self, key, default):
        default = 'Yes' if default else ''
        value = self.default(key, default).strip()
        return bool(value) and value.lower() not in ('0', 'no', 'false', 'off')

    def integer(self, key, default):
        value = self.lookup(key)
        if value is None:
            return default
        try:
            return int(value)
        except Exception:
            raise self.Error('cannot convert {} value {} to an integer'
                             .format(key, value)) from None

    def floating(self, key, default):
        value = self.lookup(key)
        if value is None:
            return default
        try:
            return float(value)
        except Exception:
            raise self.Error('cannot convert {} value {} to a number'
                             .format(key, value)) from None

    def custom(self, key, default, parse):
        value = self.lookup(key)
        if value is None:
            return default
        try:
            return parse(value)
        except Exception as e:
            raise self.Error('cannot parse {} value {}'
                             .format(key, value)) from e

    def event_loop_policy(self):
        policy = self.default('EVENT_LOOP_POLICY', None)
        if policy is None:
            return None
        if policy == 'uvloop':
            import uvloop
            return uvloop.EventLoopPolicy()
        raise self.Error('unknown event loop policy "{}"'.format(policy))
