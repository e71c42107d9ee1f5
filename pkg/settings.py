"""
Settings loader
Reads config/default.json once, merges user JSON files and the environment
"""

import copy
import json
import os
from pathlib import Path

from dotenv import load_dotenv

from zplab_errors import ConfigError

load_dotenv()

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent / 'config' / 'default.json'

# Lazy load settings
_settings = None


def _deep_merge(base, override):
    """Merge override into a copy of base; nested dicts merge key by key"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_json_file(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")


def load_settings(extra_path=None):
    """Build the settings dict: defaults, then ZPLAB_CONFIG, then extra_path"""
    settings = read_json_file(DEFAULT_CONFIG_PATH)

    env_path = os.environ.get('ZPLAB_CONFIG')
    if env_path:
        settings = _deep_merge(settings, read_json_file(env_path))
    if extra_path:
        settings = _deep_merge(settings, read_json_file(extra_path))

    threads = os.environ.get('ZPLAB_THREADS')
    if threads:
        try:
            settings['threads'] = max(1, int(threads))
        except ValueError:
            raise ConfigError(f"ZPLAB_THREADS must be an integer, got {threads!r}")
    return settings


def get_settings():
    """Lazy load the process-wide settings"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def use_settings(settings):
    """Replace the process-wide settings (the CLI calls this after parsing --config)"""
    global _settings
    _settings = settings


def get_setting(dotted_key, default=None):
    """Look up 'section.key' in the active settings"""
    node = get_settings()
    for part in dotted_key.split('.'):
        if not isinstance(node, dict) or part not in node:
            if default is not None:
                return default
            raise ConfigError(f"Unknown setting: {dotted_key}")
        node = node[part]
    return node


def merge_settings(overrides):
    """Deep-merge a dict of setting sections into the active settings"""
    use_settings(_deep_merge(get_settings(), overrides))
    return get_settings()
