#!/usr/bin/env python3
"""Regenerates mini_corpus_manifest.json from the fixture sources.

Run from this directory after editing any fixture file. The line
classification below is an independent reference used to freeze the
expected counts; tests compare the library against the frozen manifest,
never against this script.
"""
import json
import os
import sys

CORPUS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "mini_corpus")


def classify_lines(content):
    """Per-line mask: code / blank / line_comment / block_comment."""
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    masks = []
    in_block = False
    for line in lines:
        has_code = False
        has_line_comment = False
        has_block_comment = in_block and any(not ch.isspace() for ch in line)
        i = 0
        n = len(line)
        in_str = False
        in_chr = False
        while i < n:
            ch = line[i]
            if in_block:
                if ch == "*" and i + 1 < n and line[i + 1] == "/":
                    in_block = False
                    has_block_comment = True
                    i += 2
                    continue
                if not ch.isspace():
                    has_block_comment = True
                i += 1
                continue
            if in_str or in_chr:
                if not ch.isspace():
                    has_code = True
                if ch == "\\":
                    i += 2
                    continue
                if in_str and ch == '"':
                    in_str = False
                elif in_chr and ch == "'":
                    in_chr = False
                i += 1
                continue
            if ch == "/" and i + 1 < n and line[i + 1] == "/":
                has_line_comment = True
                break
            if ch == "/" and i + 1 < n and line[i + 1] == "*":
                in_block = True
                has_block_comment = True
                i += 2
                continue
            if ch == '"':
                in_str = True
                has_code = True
                i += 1
                continue
            if ch == "'":
                in_chr = True
                has_code = True
                i += 1
                continue
            if not ch.isspace():
                has_code = True
            i += 1
        # string/char literals never span lines in this corpus
        in_str = False
        in_chr = False
        if has_code:
            masks.append("code")
        elif has_block_comment:
            masks.append("block_comment")
        elif has_line_comment:
            masks.append("line_comment")
        else:
            masks.append("blank")
    return masks


def main():
    manifest = {"repos": {}}
    for repo in sorted(os.listdir(CORPUS)):
        repo_dir = os.path.join(CORPUS, repo)
        if not os.path.isdir(repo_dir):
            continue
        files = {}
        for root, _, names in os.walk(repo_dir):
            for name in sorted(names):
                if not name.endswith(".java"):
                    continue
                path = os.path.join(root, name)
                rel = os.path.relpath(path, repo_dir).replace(os.sep, "/")
                with open(path, "rb") as fh:
                    content = fh.read().decode("utf-8")
                masks = classify_lines(content)
                files[rel] = {
                    "lines": len(masks),
                    "code_lines": sum(1 for m in masks if m == "code"),
                }
        manifest["repos"][repo] = {
            "n_files": len(files),
            "n_code_lines": sum(f["code_lines"] for f in files.values()),
            "files": dict(sorted(files.items())),
        }
    out = os.path.join(os.path.dirname(CORPUS), "mini_corpus_manifest.json")
    with open(out, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    total = sum(r["n_code_lines"] for r in manifest["repos"].values())
    print("repos:", len(manifest["repos"]), "total code lines:", total)


if __name__ == "__main__":
    sys.exit(main())
