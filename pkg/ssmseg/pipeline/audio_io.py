# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""WAV decoding, downmixing and band-limited resampling."""

import dataclasses
import functools
import math
import os
import struct

import numpy as np
from scipy import signal

from ssmseg.config import WORKING_SAMPLE_RATE
from ssmseg.core.common import get_logger
from ssmseg.core.errors import CorruptHeader, UnsupportedEncoding
from ssmseg.pipeline.formats import atomic_write

logger = get_logger(__name__)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Zero crossings of the windowed sinc kept on each side of its centre,
# counted at the lower of the two rates. Each polyphase branch of an
# up/down resampler holds about 2 * 32 * max(up, down) / up taps, so never
# fewer than 64.
SINC_ZERO_CROSSINGS = 32


@dataclasses.dataclass(frozen=True, eq=False)
class AudioBuffer:
    """
    Mono PCM samples in ``[-1.0, 1.0]``.

    Parameters
    ----------
    samples : array_like
        Amplitudes; stored as a read-only float64 array.
    sample_rate : int
        Sample rate in Hz.
    source_path : str, optional
        Provenance only.
    """

    samples: np.ndarray
    sample_rate: int
    source_path: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.size and not np.all(np.abs(samples) <= 1.0):
            raise ValueError("AudioBuffer amplitudes must lie in [-1.0, 1.0]")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration_seconds(self):
        """Duration in seconds, ``len(samples) / sample_rate``."""
        return self.samples.size / self.sample_rate


@dataclasses.dataclass(frozen=True)
class WavFormat:
    """Decoded ``fmt `` chunk."""

    format_tag: int
    channels: int
    sample_rate: int
    byte_rate: int
    block_align: int
    bits_per_sample: int


def _read_chunks(data, path):
    """
    Split the RIFF body into ``(chunk_id, payload)`` pairs.

    Parameters
    ----------
    data : bytes
        Whole file contents.
    path : str
        File path for error messages.

    Returns
    -------
    list of tuple
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader(f"{path}: not a RIFF/WAVE file")
    (riff_size,) = struct.unpack_from("<I", data, 4)
    end = min(len(data), 8 + riff_size)
    chunks = []
    offset = 12
    while offset + 8 <= end:
        chunk_id = data[offset : offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        body = offset + 8
        if body + size > len(data):
            raise CorruptHeader(
                f"{path}: chunk {chunk_id!r} claims {size} bytes, only {len(data) - body} left"
            )
        chunks.append((chunk_id, data[body : body + size]))
        # chunks are word aligned
        offset = body + size + (size & 1)
    return chunks


def _parse_fmt(payload, path):
    if len(payload) < 16:
        raise CorruptHeader(f"{path}: 'fmt ' chunk is too short")
    fmt = WavFormat(*struct.unpack_from("<HHIIHH", payload, 0))
    if fmt.format_tag == WAVE_FORMAT_EXTENSIBLE:
        if len(payload) < 26:
            raise CorruptHeader(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE header")
        (sub_format,) = struct.unpack_from("<H", payload, 24)
        fmt = dataclasses.replace(fmt, format_tag=sub_format)
    if fmt.format_tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedEncoding(
            f"{path}: WAV format tag 0x{fmt.format_tag:04x} is not PCM or IEEE float"
        )
    if fmt.channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {fmt.channels} channels, expected 1 or 2")
    supported_bits = (32,) if fmt.format_tag == WAVE_FORMAT_IEEE_FLOAT else (8, 16, 24, 32)
    if fmt.bits_per_sample not in supported_bits:
        raise UnsupportedEncoding(
            f"{path}: {fmt.bits_per_sample}-bit samples are not supported for this format"
        )
    if fmt.sample_rate <= 0:
        raise CorruptHeader(f"{path}: sample rate is zero")
    if fmt.block_align != fmt.channels * fmt.bits_per_sample // 8:
        raise CorruptHeader(
            f"{path}: block align {fmt.block_align} does not match "
            f"{fmt.channels} x {fmt.bits_per_sample}-bit samples"
        )
    return fmt


def _decode_samples(payload, fmt):
    """
    Convert raw interleaved sample bytes to floats in ``[-1, 1]``.

    Returns
    -------
    np.ndarray
        Array of shape ``(n_frames, channels)``.
    """
    bits = fmt.bits_per_sample
    if fmt.format_tag == WAVE_FORMAT_IEEE_FLOAT:
        values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        values = np.clip(np.nan_to_num(values), -1.0, 1.0)
    elif bits == 8:
        # 8-bit WAV is unsigned with a 128 offset
        values = (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        values = np.frombuffer(payload, dtype="<i2") / float(1 << 15)
    elif bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        values = ints / float(1 << 23)
    else:
        values = np.frombuffer(payload, dtype="<i4") / float(1 << 31)
    return values.reshape(-1, fmt.channels)


def load_wav(path, target_rate=WORKING_SAMPLE_RATE):
    """
    Decode a WAV file into a mono buffer at `target_rate`.

    Parameters
    ----------
    path : str or os.PathLike
        Path to a PCM (8/16/24/32-bit integer) or 32-bit float WAV file with 1 or 2 channels.
    target_rate : int, default: 16000
        Sample rate of the returned buffer.

    Returns
    -------
    AudioBuffer

    Raises
    ------
    FileNotFoundError
        If `path` does not exist.
    UnsupportedEncoding
        If the file is compressed or has an unsupported layout.
    CorruptHeader
        If RIFF, ``fmt `` and ``data`` chunks are inconsistent.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"No such audio file: '{path}'")
    with open(path, "rb") as f:
        data = f.read()

    fmt = None
    payload = None
    for chunk_id, body in _read_chunks(data, path):
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body, path)
        elif chunk_id == b"data":
            if fmt is None:
                raise CorruptHeader(f"{path}: 'data' chunk precedes 'fmt ' chunk")
            payload = body
            break
        else:
            logger.debug(f"{path}: skipping chunk {chunk_id!r}")
    if fmt is None:
        raise CorruptHeader(f"{path}: missing 'fmt ' chunk")
    if payload is None:
        raise CorruptHeader(f"{path}: missing 'data' chunk")
    if len(payload) == 0:
        raise CorruptHeader(f"{path}: 'data' chunk is empty")
    if len(payload) % fmt.block_align:
        raise CorruptHeader(
            f"{path}: 'data' size {len(payload)} is not a multiple of block align {fmt.block_align}"
        )

    frames = _decode_samples(payload, fmt)
    mono = frames.mean(axis=1) if fmt.channels > 1 else frames[:, 0]
    logger.info(
        f"Loaded {path}: {frames.shape[0]} frames, {fmt.channels} ch, "
        f"{fmt.bits_per_sample} bit, {fmt.sample_rate} Hz"
    )
    buffer = AudioBuffer(mono, fmt.sample_rate, source_path=path)
    return resample(buffer, target_rate)


@functools.lru_cache(maxsize=16)
def _sinc_filter(up, down):
    """
    Design the Hann-windowed sinc low-pass for an ``up / down`` rational resampler.

    Returns
    -------
    np.ndarray
        Read-only filter coefficients with unity DC gain.
    """
    max_rate = max(up, down)
    half_len = SINC_ZERO_CROSSINGS * max_rate
    taps = signal.firwin(2 * half_len + 1, 1.0 / max_rate, window="hann")
    taps.setflags(write=False)
    return taps


def resample(buffer, target_rate):
    """
    Band-limited resampling by windowed-sinc polyphase interpolation.

    Parameters
    ----------
    buffer : AudioBuffer
        Input audio.
    target_rate : int
        Output sample rate in Hz.

    Returns
    -------
    AudioBuffer
        `buffer` itself when the rates are equal, otherwise a new buffer of
        ``ceil(len * target_rate / sample_rate)`` samples.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buffer.sample_rate:
        return buffer
    g = math.gcd(int(target_rate), int(buffer.sample_rate))
    up, down = int(target_rate) // g, int(buffer.sample_rate) // g
    taps = _sinc_filter(up, down)
    out = signal.resample_poly(buffer.samples, up, down, window=np.array(taps))
    # ringing near full scale can overshoot
    out = np.clip(out, -1.0, 1.0)
    logger.debug(f"Resampled {buffer.sample_rate} Hz -> {target_rate} Hz ({up}/{down})")
    return AudioBuffer(out, int(target_rate), source_path=buffer.source_path)


def encode_wav_pcm16(buffer):
    """
    Encode `buffer` as a canonical 16-bit PCM mono WAV file image.

    Parameters
    ----------
    buffer : AudioBuffer
        Audio to encode.

    Returns
    -------
    bytes
    """
    # same 1/32768 scale as the reader; +1.0 clips to the largest code
    scaled = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767)
    pcm = scaled.astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(pcm),
        b"WAVE",
        b"fmt ",
        16,
        WAVE_FORMAT_PCM,
        1,
        buffer.sample_rate,
        buffer.sample_rate * 2,
        2,
        16,
        b"data",
        len(pcm),
    )
    return header + pcm


def write_wav(path, buffer):
    """
    Atomically write `buffer` as a 16-bit PCM mono WAV file.

    Parameters
    ----------
    path : str or os.PathLike
        Output path.
    buffer : AudioBuffer
        Audio to write.
    """
    atomic_write(path, encode_wav_pcm16(buffer))
