# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Typed configuration parameters read from environment variables."""

import math
import os
import typing


class TypeDescriptor(typing.NamedTuple):
    """
    How values of one config type are checked and converted.

    Parameters
    ----------
    decode : callable
        Converts a raw string from the environment or a config file.
    normalize : callable
        Converts a user-provided value (string or already typed).
    verify : callable
        Tells whether a raw or user-provided value is acceptable.
    help : str
        Human-readable description used in error messages.
    """

    decode: typing.Callable[[str], object]
    normalize: typing.Callable[[object], object]
    verify: typing.Callable[[object], bool]
    help: str


class ExactStr(str):
    """String config type kept as is (no stripping, no case folding)."""


class OptionalFloat(float):
    """Class to be used in type params for a float that may be unset (``None``)."""


def _is_float(value):
    """
    Check that `value` is a finite real number or a string holding one.

    Parameters
    ----------
    value : object
        Value to check.

    Returns
    -------
    bool
    """
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, float)):
        return math.isfinite(value)
    if isinstance(value, str):
        try:
            return math.isfinite(float(value.strip()))
        except ValueError:
            return False
    return False


def _is_int(value):
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return True
    if isinstance(value, float):
        return value.is_integer()
    if isinstance(value, str):
        stripped = value.strip()
        return stripped.lstrip("-").isdigit()
    return False


def _is_none(value):
    return value is None or (
        isinstance(value, str) and value.strip().lower() in {"none", ""}
    )


_TYPE_PARAMS = {
    str: TypeDescriptor(
        decode=lambda value: value.strip().lower(),
        normalize=lambda value: value.strip().lower(),
        verify=lambda value: isinstance(value, str),
        help="a case-insensitive string",
    ),
    ExactStr: TypeDescriptor(
        decode=lambda value: value,
        normalize=lambda value: value,
        verify=lambda value: isinstance(value, str),
        help="a string",
    ),
    bool: TypeDescriptor(
        decode=lambda value: value.strip().lower() in {"true", "yes", "1"},
        normalize=lambda value: value.strip().lower() in {"true", "yes", "1"}
        if isinstance(value, str)
        else bool(value),
        verify=lambda value: isinstance(value, bool)
        or (
            isinstance(value, str)
            and value.strip().lower() in {"true", "yes", "1", "false", "no", "0"}
        ),
        help="a boolean flag (any of 'true', 'yes' or '1' in case insensitive manner is considered positive)",
    ),
    int: TypeDescriptor(
        decode=lambda value: int(value.strip()),
        normalize=lambda value: int(value.strip()) if isinstance(value, str) else int(value),
        verify=_is_int,
        help="an integer value",
    ),
    float: TypeDescriptor(
        decode=lambda value: float(value.strip()),
        normalize=lambda value: float(value.strip()) if isinstance(value, str) else float(value),
        verify=_is_float,
        help="a finite real value",
    ),
    OptionalFloat: TypeDescriptor(
        decode=lambda value: None if _is_none(value) else float(value.strip()),
        normalize=lambda value: None
        if _is_none(value)
        else (float(value.strip()) if isinstance(value, str) else float(value)),
        verify=lambda value: _is_none(value) or _is_float(value),
        help="a finite real value or 'none'",
    ),
}

# Special marker to distinguish unset value from ``None`` value
# as someone may want to use ``None`` as a real value for a parameter
_UNSET = object()


def get_type_descriptor(type):
    """
    Get the ``TypeDescriptor`` used to decode and verify values of `type`.

    Parameters
    ----------
    type : type
        One of the supported config types.

    Returns
    -------
    TypeDescriptor

    Raises
    ------
    KeyError
        If `type` is not supported.
    """
    return _TYPE_PARAMS[type]


class ValueSource:
    """Where the current value of a parameter came from."""

    # neither put() nor the environment provided a value
    DEFAULT = 0
    # put() by the caller, e.g. the --threads flag
    SET_BY_USER = 1
    # read from the environment
    GOT_FROM_CFG_SOURCE = 2


class Parameter(object):
    """
    A lazily read, cached configuration value.

    Attributes
    ----------
    choices : sequence of str
        Accepted values; any value of the type is accepted if ``None``.
    type : type
        Key of the type descriptor used to decode values.
    default : Any
        Value used when no source provides one.
    _value_source : int
        One of the ``ValueSource`` constants.
    """

    choices: typing.Sequence[str] = None
    type = str
    default = None
    _value_source = None

    @classmethod
    def _get_raw_from_config(cls) -> str:
        """
        Read the raw value from the backing source.

        Returns
        -------
        str

        Raises
        ------
        KeyError
            If the source has no value.
        """
        raise NotImplementedError()

    def __init_subclass__(cls, type, **kw):
        """
        Register the value type of a parameter class.

        Parameters
        ----------
        type : type
            One of the types with a descriptor.
        **kw : dict
            Forwarded to ``object.__init_subclass__``.
        """
        assert type in _TYPE_PARAMS, f"Unsupported variable type: {type}"
        cls.type = type
        cls._value = _UNSET
        super().__init_subclass__(**kw)

    @classmethod
    def _get_default(cls):
        """
        Get default value of the config.

        Returns
        -------
        Any
        """
        return cls.default

    @classmethod
    def get_value_source(cls):
        """
        Get value source of the config.

        Returns
        -------
        int
        """
        if cls._value_source is None:
            cls.get()
        return cls._value_source

    @classmethod
    def get(cls):
        """
        Get the value, reading the source on first use.

        Returns
        -------
        Any

        Raises
        ------
        ValueError
            If the raw value cannot be decoded or is not one of `choices`.
        """
        if cls._value is _UNSET:
            try:
                raw = cls._get_raw_from_config()
            except KeyError:
                cls._value = cls._get_default()
                cls._value_source = ValueSource.DEFAULT
            else:
                if not _TYPE_PARAMS[cls.type].verify(raw):
                    raise ValueError(f"Unsupported raw value: {raw}")
                cls._value = _TYPE_PARAMS[cls.type].decode(raw)
                cls._value_source = ValueSource.GOT_FROM_CFG_SOURCE

        if cls.choices is not None and cls._value not in cls.choices:
            raise ValueError(
                f"Unsupported value '{cls._value}'. Supported set of values is {cls.choices}."
            )
        return cls._value

    @classmethod
    def put(cls, value):
        """
        Override the value for the rest of the process.

        Parameters
        ----------
        value : Any
            Raw string or typed value.
        """
        if not _TYPE_PARAMS[cls.type].verify(value):
            raise ValueError(f"Unsupported value: {value}")
        cls._value = _TYPE_PARAMS[cls.type].normalize(value)
        cls._value_source = ValueSource.SET_BY_USER

    @classmethod
    def reset(cls):
        """Forget the cached value so that the next ``get`` reads the config source again."""
        cls._value = _UNSET
        cls._value_source = None


class EnvironmentVariable(Parameter, type=str):
    """Parameter backed by the environment variable `varname`."""

    varname: str = None

    @classmethod
    def _get_raw_from_config(cls) -> str:
        """
        Read `varname` from the environment.

        Returns
        -------
        str

        Raises
        ------
        KeyError
            If the variable is not set.
        """
        return os.environ[cls.varname]
