#!/usr/bin/env python3
"""Regenerates fixtures/coverage/, a 199-resource synthetic corpus whose
documentation covers a fixed number of schema fields.

    python3 scripts/gen_coverage_fixture.py

Each resource gets a schema dump (schemas/<name>.json) and a documentation
page (docs/<name>.md). Documented fields are drawn at random, without
replacement, so that ingestion yields exactly:

    top-level arguments    1531 / 1875
    block-level arguments  4135 / 5558
    attributes              503 /  527

The expected counts are also written to EXPECTED.json.
"""

import json
import os
import random
import shutil

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), ".."))
OUT = os.path.join(ROOT, "fixtures", "coverage")

N_RESOURCES = 199
TOP = (1531, 1875)
BLOCK = (4135, 5558)
ATTR = (503, 527)
TYPES = ["string", "number", "bool", "list(string)", "map(string)"]


def partition(total, parts, rng, minimum=1):
    """Random composition of `total` into `parts` positive integers."""
    assert total >= parts * minimum
    cuts = sorted(rng.sample(range(1, total - parts * (minimum - 1)), parts - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [total - parts * (minimum - 1)])]
    return [s + minimum - 1 for s in sizes]


def main():
    rng = random.Random(20240611)
    names = [f"synth_resource_{i:03d}" for i in range(N_RESOURCES)]
    top_sizes = partition(TOP[1], N_RESOURCES, rng)
    attr_sizes = partition(ATTR[1], N_RESOURCES, rng)
    block_counts = [rng.randint(1, 5) for _ in names]
    block_arg_sizes = partition(BLOCK[1], sum(block_counts), rng)

    resources = []
    fields = {"top": [], "block": [], "attr": []}
    k = 0
    for r, name in enumerate(names):
        top = [
            {"name": f"arg_{j:02d}", "type": rng.choice(TYPES), "required": rng.random() < 0.3}
            for j in range(top_sizes[r])
        ]
        blocks = []
        for b in range(block_counts[r]):
            n_args = block_arg_sizes[k]
            k += 1
            bname = f"blk{b}"
            args = [
                {"name": f"{bname}_p{j:02d}", "type": rng.choice(TYPES), "required": rng.random() < 0.4}
                for j in range(n_args)
            ]
            block = {
                "name": bname,
                "min_items": rng.choice([0, 1]),
                "max_items": rng.choice([1, 3, None]),
                "arguments": args,
                "path": [bname],
            }
            # Some blocks hang below the previous top-level block.
            if blocks and rng.random() < 0.3:
                parent = blocks[-1]
                block["path"] = parent["path"] + [bname]
                parent.setdefault("children", []).append(block)
            blocks.append(block)
        attrs = [{"name": f"attr_{j:02d}", "type": "string"} for j in range(attr_sizes[r])]
        resources.append({"name": name, "top": top, "blocks": blocks, "attrs": attrs})
        for a in top:
            fields["top"].append((name, a["name"]))
        for b in blocks:
            for a in b["arguments"]:
                fields["block"].append((name, a["name"]))
        for a in attrs:
            fields["attr"].append((name, a["name"]))
    assert k == len(block_arg_sizes)

    documented = set()
    for key, (matched, total) in (("top", TOP), ("block", BLOCK), ("attr", ATTR)):
        assert len(fields[key]) == total, (key, len(fields[key]))
        documented.update((key,) + f for f in rng.sample(fields[key], matched))

    shutil.rmtree(OUT, ignore_errors=True)
    os.makedirs(os.path.join(OUT, "schemas"))
    os.makedirs(os.path.join(OUT, "docs"))

    def raw_block(b):
        out = {
            "name": b["name"],
            "min_items": b["min_items"],
            "max_items": b["max_items"],
            "arguments": b["arguments"],
        }
        if b.get("children"):
            out["blocks"] = [raw_block(c) for c in b["children"]]
        return out

    for res in resources:
        name = res["name"]
        dump = {
            "resource_name": name,
            "arguments": res["top"],
            "blocks": [raw_block(b) for b in res["blocks"] if len(b["path"]) == 1],
            "attributes": res["attrs"],
        }
        with open(os.path.join(OUT, "schemas", f"{name}.json"), "w") as f:
            json.dump(dump, f, separators=(",", ":"))
            f.write("\n")

        md = [f"# Resource: {name}", "", f"Manages a synthetic {name.replace('_', ' ')}.", ""]
        md += ["## Example Usage", "", "```hcl", f'resource "{name}" "example" {{', "}", "```", ""]
        md += ["## Argument Reference", ""]
        for a in res["top"]:
            if ("top", name, a["name"]) in documented:
                marker = "Required" if a["required"] else "Optional"
                md.append(f"- `{a['name']}` - ({marker}) Sets {a['name'].replace('_', ' ')}.")
        for b in res["blocks"]:
            md += ["", "### " + " ".join(f"`{p}`" for p in b["path"]) + " Block", ""]
            for a in b["arguments"]:
                if ("block", name, a["name"]) in documented:
                    marker = "Required" if a["required"] else "Optional"
                    md.append(f"- `{a['name']}` - ({marker}) Nested setting {a['name']}.")
        md += ["", "## Attribute Reference", ""]
        for a in res["attrs"]:
            if ("attr", name, a["name"]) in documented:
                md.append(f"- `{a['name']}` - Exported {a['name']}.")
        with open(os.path.join(OUT, "docs", f"{name}.md"), "w") as f:
            f.write("\n".join(md) + "\n")

    expected = {
        "resources": N_RESOURCES,
        "top_level_args": {"matched": TOP[0], "total": TOP[1]},
        "block_level_args": {"matched": BLOCK[0], "total": BLOCK[1]},
        "attributes": {"matched": ATTR[0], "total": ATTR[1]},
        "overall": {"matched": TOP[0] + BLOCK[0] + ATTR[0], "total": TOP[1] + BLOCK[1] + ATTR[1]},
    }
    with open(os.path.join(OUT, "EXPECTED.json"), "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
