"""Run manifests: flat key=value sidecar files recording exactly how an
artifact was produced, so any run can be replayed bit-for-bit.

Layout (one entry per line, '#' comments allowed):

    tool=freqaug
    version=0.1.0
    subcommand=augment
    arg.radius=4.0
    in.data=/path/train.bin
    in.data.sha256=...
    out.data=/path/aug.bin
    out.data.sha256=...

arg.* keys map one-to-one onto CLI flags (underscores become dashes), which
is what makes `replay` possible without storing raw argv.
"""

from __future__ import annotations

import hashlib

from .errors import FormatError

TOOL_NAME = "freqaug"
TOOLKIT_VERSION = "0.1.0"


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    text = str(value)
    if "\n" in text:
        raise FormatError(f"manifest value contains newline: {value!r}")
    return text


def build_manifest(subcommand: str, args: dict, inputs: dict, outputs: dict) -> str:
    """Render manifest text. Hashes are computed here, so call this after the
    outputs exist. None-valued args are omitted (flag not given)."""
    lines = [
        f"tool={TOOL_NAME}",
        f"version={TOOLKIT_VERSION}",
        f"subcommand={subcommand}",
    ]
    for key in sorted(args):
        if args[key] is None:
            continue
        lines.append(f"arg.{key}={format_value(args[key])}")
    for role in sorted(inputs):
        lines.append(f"in.{role}={inputs[role]}")
        lines.append(f"in.{role}.sha256={sha256_file(inputs[role])}")
    for role in sorted(outputs):
        lines.append(f"out.{role}={outputs[role]}")
        lines.append(f"out.{role}.sha256={sha256_file(outputs[role])}")
    return "\n".join(lines) + "\n"


def write_manifest(path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def parse_manifest(path) -> dict:
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"manifest line {lineno} is not key=value: {line!r}")
            key, _, value = line.partition("=")
            if not key:
                raise FormatError(f"manifest line {lineno} has an empty key")
            entries[key] = value
    for required in ("tool", "version", "subcommand"):
        if required not in entries:
            raise FormatError(f"manifest is missing the '{required}' entry")
    if entries["tool"] != TOOL_NAME:
        raise FormatError(f"manifest is for tool {entries['tool']!r}, not {TOOL_NAME!r}")
    return entries


def manifest_argv(entries: dict) -> list[str]:
    """Reconstruct the CLI argv (without the program name) from a manifest."""
    argv = [entries["subcommand"]]
    for key in sorted(entries):
        if not key.startswith("arg."):
            continue
        flag = "--" + key[len("arg.") :].replace("_", "-")
        value = entries[key]
        if value == "true":
            argv.append(flag)
        elif value == "false":
            continue
        else:
            argv.extend([flag, value])
    return argv


def hash_mismatches(entries: dict, prefix: str) -> list[str]:
    """Compare recorded in.*/out.* hashes against files on disk."""
    problems = []
    for key, value in entries.items():
        if not (key.startswith(prefix + ".") and key.endswith(".sha256")):
            continue
        role = key[len(prefix) + 1 : -len(".sha256")]
        path = entries.get(f"{prefix}.{role}")
        if path is None:
            problems.append(f"{key} has no matching path entry")
            continue
        try:
            actual = sha256_file(path)
        except OSError as exc:
            problems.append(f"{prefix}.{role}: cannot hash {path}: {exc}")
            continue
        if actual != value:
            problems.append(f"{prefix}.{role}: {path} hash {actual[:12]}.. != recorded {value[:12]}..")
    return problems
