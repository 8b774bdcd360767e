#!/usr/bin/env python3
# Copyright 2026 The SliceRank Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert the public arena preference export to slicerank JSONL.

Reads parquet or newline-delimited JSON with the export's columns (id,
model_a, model_b, winner, conversation_a, conversation_b, language,
timestamp, is_code) and writes one judgment per line. Only the first user
turn is kept as the prompt; prompt ids are a hash of its text so repeated
prompts share an id.

    python3 tools/convert_arena_export.py train-*.parquet -o arena.jsonl
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import polars as pl

WINNERS = {"model_a": "a_win", "model_b": "b_win", "tie": "tie", "both_bad": "both_bad",
           "tie (bothbad)": "both_bad"}


def turn_text(content):
    """Text of one message whose content is a string or a list of parts."""
    if content is None:
        return ""
    if isinstance(content, str):
        return content
    parts = []
    for part in content:
        if isinstance(part, dict):
            if part.get("type", "text") == "text" and part.get("text"):
                parts.append(part["text"])
        elif isinstance(part, str):
            parts.append(part)
    return "\n".join(parts)


def first_turns(conversation):
    """(first user text, first assistant text) of a message list."""
    prompt = response = None
    for msg in conversation or []:
        role = msg.get("role")
        if role == "user" and prompt is None:
            prompt = turn_text(msg.get("content"))
        elif role == "assistant" and prompt is not None and response is None:
            response = turn_text(msg.get("content"))
    return prompt, response


def prompt_id(text):
    return "p" + hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def read(path):
    """Rows as dicts. Parquet goes through polars; JSON lines are parsed
    directly so nested message lists keep their shape."""
    if path.suffix == ".parquet":
        yield from pl.read_parquet(path).iter_rows(named=True)
        return
    with path.open(encoding="utf-8") as f:
        for line in f:
            if line.strip():
                yield json.loads(line)


def convert_row(row):
    outcome = WINNERS.get(str(row.get("winner", "")).lower())
    if outcome is None:
        raise ValueError(f"unknown winner {row.get('winner')!r}")
    prompt, response_a = first_turns(row.get("conversation_a"))
    _, response_b = first_turns(row.get("conversation_b"))
    if not prompt:
        raise ValueError("no user turn")
    record = {
        "judgment_id": str(row["id"]),
        "prompt_id": prompt_id(prompt),
        "prompt": prompt,
        "model_a": row["model_a"],
        "model_b": row["model_b"],
        "outcome": outcome,
        "language": row.get("language") or "unknown",
        "tags": ["code"] if row.get("is_code") else [],
    }
    ts = row.get("timestamp")
    if ts is not None:
        record["timestamp"] = ts.isoformat() if hasattr(ts, "isoformat") else str(ts)
    if response_a is not None:
        record["response_a"] = response_a
    if response_b is not None:
        record["response_b"] = response_b
    return record


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("inputs", nargs="+", type=Path)
    parser.add_argument("-o", "--output", type=Path, required=True)
    args = parser.parse_args(argv)

    written = skipped = 0
    with args.output.open("w", encoding="utf-8") as out:
        for path in args.inputs:
            for row in read(path):
                try:
                    record = convert_row(row)
                except (KeyError, ValueError) as e:
                    skipped += 1
                    print(f"{path}: row {row.get('id')}: {e}", file=sys.stderr)
                    continue
                out.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
                written += 1
    print(json.dumps({"written": written, "skipped": skipped}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
