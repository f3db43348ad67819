#!/usr/bin/env python3
"""Regenerates the data fixtures under fixtures/.

The fixtures are committed; this script documents how they were produced and
lets them be rebuilt deterministically:

    python3 scripts/gen_fixtures.py

Outputs:
    fixtures/outcomes/paper_outcomes.csv   six-method paired outcome table (457 prompts)
    fixtures/baseline_logs/*.log           technical-validation logs (774 error stanzas)
    fixtures/baseline_logs/EXPECTED.json   per-label counts the logs were built from
    fixtures/changelog/CHANGELOG.md        provider changelog for attribution
    fixtures/prompts20/<id>/               20-case prompt set for end-to-end runs
"""

import itertools
import json
import os
import random
import sys

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), ".."))
FIX = os.path.join(ROOT, "fixtures")

METHODS = ["base", "naive_rag", "gr_base", "gr_optmatch", "gr_llmsum", "gr_ref"]
SHORT = ["B", "N", "G", "O", "L", "R"]


# --------------------------------------------------------------------------
# Paired outcomes
# --------------------------------------------------------------------------

def solve_patterns():
    import numpy as np
    from scipy.optimize import LinearConstraint, Bounds, milp

    idx = {m: i for i, m in enumerate(SHORT)}
    pats = list(itertools.product([0, 1, 2], repeat=6))
    rows, lo, hi = [], [], []

    def add(f, l, h=None):
        rows.append([1 if f(p) else 0 for p in pats])
        lo.append(l)
        hi.append(l if h is None else h)

    tv = dict(B=170, N=321, G=367, O=385, L=380, R=367)
    iv = dict(B=124, N=240, G=267, O=285, L=286, R=276)
    add(lambda p: True, 457)
    for m in SHORT:
        i = idx[m]
        add(lambda p, i=i: p[i] >= 1, tv[m])
        add(lambda p, i=i: p[i] == 2, iv[m])

    def both(a, b):
        return lambda p: p[idx[a]] >= 1 and p[idx[b]] >= 1

    for a, b, v in [("G", "N", 286), ("O", "G", 342), ("L", "R", 338),
                    ("N", "B", 134), ("G", "B", 150), ("O", "L", 363)]:
        add(both(a, b), v)

    def iv_only(a, b):
        return lambda p: p[idx[a]] == 2 and p[idx[b]] == 1

    for a, b, x, y in [("G", "N", 13, 14), ("G", "B", 18, 12), ("N", "B", 24, 9),
                       ("O", "G", 17, 11), ("O", "L", 9, 13), ("L", "R", 11, 13)]:
        add(iv_only(a, b), x)
        add(iv_only(b, a), y)
    add(lambda p: p[idx["O"]] == 2 and p[idx["G"]] == 2, 244)

    def tv_disc(a, b):
        return lambda p: (p[idx[a]] >= 1) != (p[idx[b]] >= 1)

    def ov_disc(a, b):
        return lambda p: (p[idx[a]] == 2) != (p[idx[b]] == 2)

    for a, b in itertools.combinations(["G", "O", "L", "R"], 2):
        add(tv_disc(a, b), int(abs(tv[a] - tv[b]) ** 2 / 6.5) + 1, 457)
        add(ov_disc(a, b), int(abs(iv[a] - iv[b]) ** 2 / 6.5) + 1, 457)
    for b in ["G", "O", "L", "R"]:
        add(tv_disc("N", b), 0, int(abs(tv["N"] - tv[b]) ** 2 / 11))
        add(ov_disc("N", b), 0, int(abs(iv["N"] - iv[b]) ** 2 / 11))

    cost = np.random.default_rng(7).random(len(pats))
    res = milp(cost, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=np.ones(len(pats)), bounds=Bounds(0, 457))
    if res.status != 0:
        sys.exit("outcome MILP infeasible: " + res.message)
    x = np.round(res.x).astype(int)
    return [[list(pats[i]), int(x[i])] for i in range(len(pats)) if x[i] > 0]


def write_outcomes():
    cache = os.path.join(ROOT, "scripts", "outcome_patterns.json")
    if os.path.exists(cache):
        patterns = json.load(open(cache))
    else:
        patterns = solve_patterns()
        json.dump(patterns, open(cache, "w"))
    rows = []
    for pat, count in patterns:
        rows.extend([pat] * count)
    random.Random(2025).shuffle(rows)
    label = {0: "fail", 1: "tv", 2: "pass"}
    out = os.path.join(FIX, "outcomes")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "paper_outcomes.csv"), "w") as f:
        f.write("prompt_id," + ",".join(METHODS) + "\n")
        for i, pat in enumerate(rows):
            f.write("p%03d," % (i + 1) + ",".join(label[s] for s in pat) + "\n")


# --------------------------------------------------------------------------
# Baseline technical-validation logs
# --------------------------------------------------------------------------

RESOURCES = [
    "aws_instance", "aws_s3_bucket", "aws_lambda_function", "aws_db_instance",
    "aws_security_group", "aws_lb", "aws_lb_listener", "aws_route53_record",
    "aws_codebuild_project", "aws_iam_role", "aws_eks_node_group", "aws_msk_cluster",
    "aws_elastic_beanstalk_environment", "aws_dynamodb_table", "aws_cloudfront_distribution",
    "aws_kinesis_stream", "aws_sagemaker_endpoint_configuration", "aws_vpc", "aws_subnet",
    "aws_ecs_service", "aws_sqs_queue", "aws_glue_job", "aws_connect_instance",
]

HALLUCINATED_ARGS = [
    "enable_logging", "auto_scaling", "encryption_enabled", "tags_all_enabled",
    "log_retention", "versioning_enabled", "backup_enabled", "ssl_enabled",
    "public_access", "instance_name", "cluster_size", "target_arn", "retention_days",
    "enable_monitoring", "security_group_names", "storage_encrypted_key",
    "allow_public", "subnet_group", "replica_count", "access_logs_enabled",
    "node_count", "default_action_type", "set_identifier", "health_check",
    "region", "zone_name", "kms_key", "enable_dns", "max_capacity", "min_capacity",
]
HALLUCINATED_BLOCKS = [
    "logging_config", "encryption", "autoscaling", "lifecycle_policy", "backup",
    "monitoring", "network", "access_policy", "scaling_config_v2", "retention",
    "endpoint", "security", "health_check_config", "versioning_configuration",
    "listener", "destination",
]
NONEXISTENT_RESOURCES = [
    "aws_s3_bucket_website", "aws_lambda", "aws_rds_instance", "aws_eks_nodegroup",
    "aws_msk_serverless", "aws_cloudwatch_alarm", "aws_elasticbeanstalk_app",
    "aws_route53_health", "aws_ec2_instance", "aws_kinesis_firehose",
    "aws_dynamodb_global", "aws_connect_bot", "aws_glue_crawler_job",
    "aws_sagemaker_model_endpoint", "aws_vpc_subnet",
]

DEPRECATED_ARGS = [
    ("aws_db_instance", "name"), ("aws_s3_bucket", "acl"), ("aws_s3_bucket", "policy"),
    ("aws_instance", "network_interface_id"), ("aws_lb", "subnet_mapping_ids"),
    ("aws_eks_node_group", "remote_access_key"), ("aws_msk_cluster", "broker_node_az_distribution"),
    ("aws_route53_record", "allow_overwrite_all"), ("aws_codebuild_project", "badge_url_enabled"),
]
DEPRECATED_BLOCKS = [("aws_s3_bucket", "website"), ("aws_s3_bucket", "server_side_encryption_configuration")]

# Dim-1 atomic label counts (GPT-4o column).
LABEL_COUNTS = [
    ("tle", 4), ("fmt", 8), ("unsupported_arg", 326), ("missing_arg", 140),
    ("wrong_value", 13), ("reserved", 2), ("conflict", 3), ("repeat_arg", 4),
    ("missing_attr", 3), ("attr_misuse", 5), ("unsupported_block", 104),
    ("missing_block", 64), ("too_many_blocks", 1), ("bad_resource_type", 44),
    ("undeclared_ref", 10), ("duplicate_resource", 12), ("file_missing", 23),
    ("provider_missing", 1), ("duplicate_provider", 6), ("version", 1),
]

REAL_ARGS = ["name", "vpc_id", "subnet_ids", "role_arn", "bucket", "engine", "instance_class",
             "pipeline_name", "user_name", "target_vault_name", "enabled", "status", "rule_action",
             "cluster_name", "node_role_arn", "handler", "runtime", "ami", "cidr_block"]
REAL_BLOCKS = ["ingress", "default_action", "scaling_config", "artifacts", "environment",
               "source", "attribute", "origin", "default_cache_behavior", "restrictions",
               "viewer_certificate", "secondary_artifacts"]


def stanza(kind, rng, element=None):
    res = rng.choice(RESOURCES)
    label = "this"
    line = rng.randint(3, 120)
    loc = '  on main.tf line %d, in resource "%s" "%s":' % (line, res, label)
    src = "  %d:     %%s" % line

    if kind == "unsupported_arg":
        res, arg = element
        loc = '  on main.tf line %d, in resource "%s" "%s":' % (line, res, label)
        return ["Error: Unsupported argument", "", loc, src % ('%s = "x"' % arg), "",
                'An argument named "%s" is not expected here.' % arg]
    if kind == "unsupported_block":
        res, blk = element
        loc = '  on main.tf line %d, in resource "%s" "%s":' % (line, res, label)
        return ["Error: Unsupported block type", "", loc, src % ("%s {" % blk), "",
                'Blocks of type "%s" are not expected here.' % blk]
    if kind == "bad_resource_type":
        rtype = element
        loc = '  on main.tf line %d, in resource "%s" "%s":' % (line, rtype, label)
        return ["Error: Invalid resource type", "", loc,
                src % ('resource "%s" "%s" {' % (rtype, label)), "",
                'The provider hashicorp/aws does not support resource type "%s".' % rtype]
    if kind == "tle":
        return rng.choice([
            ["Error: Argument or block definition required", "", loc, src % "}}", "",
             "An argument or block definition is required here."],
            ["Error: Unclosed configuration block", "", loc, src % "resource {", "",
             "There is no closing brace for this block before the end of the file. "
             "This may be caused by incorrect brace nesting elsewhere in this file."],
        ])
    if kind == "fmt":
        return rng.choice([
            ["Error: Invalid resource name", "", '  on main.tf line %d:' % line,
             src % 'resource "%s" "1bucket" {' % res, "",
             "A name must start with a letter or underscore and may contain only letters, "
             "digits, underscores, and dashes."],
            ["Error: Invalid character", "", '  on main.tf line %d:' % line, src % "name = 'x'", "",
             "Single quotes are not valid. Use double quotes (\") to enclose strings."],
        ])
    if kind == "missing_arg":
        arg = rng.choice(REAL_ARGS)
        return ["Error: Missing required argument", "", loc, src % 'resource "%s" "%s" {' % (res, label), "",
                'The argument "%s" is required, but no definition was found.' % arg]
    if kind == "wrong_value":
        return rng.choice([
            ["Error: Incorrect attribute value type", "", loc, src % "port = \"eighty\"", "",
             'Inappropriate value for attribute "port": a number is required.'],
            ['Error: expected engine to be one of ["mysql" "postgres" "mariadb"], got mysql8', "", loc,
             src % 'engine = "mysql8"'],
        ])
    if kind == "reserved":
        return ["Error: Reserved argument name in resource block", "", loc, src % "version = 2", "",
                'The name "version" is reserved for use in a future version of Terraform.']
    if kind == "conflict":
        return ["Error: Conflicting configuration arguments", "", loc, src % "name_prefix = \"a\"", "",
                '"name_prefix": conflicts with name']
    if kind == "repeat_arg":
        return ["Error: Attribute redefined", "", loc, src % 'name = "b"', "",
                'The argument "name" was already set at main.tf:%d,3-7. Each argument may be set only once.' % (line - 1)]
    if kind == "missing_attr":
        return ["Error: Unsupported attribute", "", '  on main.tf line %d, in output "endpoint":' % line,
                src % "value = %s.%s.endpoint_url" % (res, label), "",
                'This object has no argument, nested block, or exported attribute named "endpoint_url".']
    if kind == "attr_misuse":
        return rng.choice([
            ["Error: Missing resource instance key", "", loc, src % "subnet_id = aws_subnet.this.id", "",
             'Because aws_subnet.this has "count" set, its attributes must be accessed on specific instances.'],
            ["Error: Invalid index", "", loc, src % "value = aws_subnet.this[5].id", "",
             "The given key does not identify an element in this collection value."],
        ])
    if kind == "missing_block":
        blk = rng.choice(REAL_BLOCKS)
        return ["Error: Insufficient %s blocks" % blk, "", loc, src % 'resource "%s" "%s" {' % (res, label), "",
                'At least 1 "%s" blocks are required.' % blk]
    if kind == "too_many_blocks":
        return ["Error: Too many scaling_config blocks", "", loc, src % "scaling_config {", "",
                'No more than 1 "scaling_config" blocks are allowed']
    if kind == "undeclared_ref":
        other = rng.choice(RESOURCES)
        return ["Error: Reference to undeclared resource", "", loc, src % ("vpc_id = %s.main.id" % other), "",
                'A managed resource "%s" "main" has not been declared in the root module.' % other]
    if kind == "duplicate_resource":
        return ['Error: Duplicate resource "%s" configuration' % res, "",
                '  on main.tf line %d:' % line, src % 'resource "%s" "%s" {' % (res, label), "",
                'A %s resource named "%s" was already declared at main.tf:3,1-30. '
                'Resource names must be unique per type in each module.' % (res, label)]
    if kind == "file_missing":
        return rng.choice([
            ["Error: Invalid function argument", "", loc, src % 'filename = filebase64("lambda.zip")', "",
             'Invalid value for "path" parameter: no file exists at "lambda.zip"; this function works '
             'only with files that are distributed as part of the configuration source code.'],
            ["Error: reading ZIP file (function.zip): open function.zip: no such file or directory", "",
             loc],
        ])
    if kind == "provider_missing":
        return ["Error: Provider configuration not present", "",
                'To work with %s.%s its original provider configuration at '
                'provider["registry.terraform.io/hashicorp/aws"].west is required, but it has been removed.' % (res, label)]
    if kind == "duplicate_provider":
        return ["Error: Duplicate provider configuration", "", '  on main.tf line %d:' % line,
                src % 'provider "aws" {', "",
                'A default (non-aliased) provider configuration for "aws" was already given at main.tf:1,1-15. '
                'If multiple configurations are required, set the "alias" argument for alternative configurations.']
    if kind == "version":
        return ["Error: Failed to query available provider packages", "",
                "Could not retrieve the list of available versions for provider hashicorp/aws: "
                "no available releases match the given constraints ~> 6.5"]
    raise ValueError(kind)


def element_pools(rng):
    args = []
    for i in range(309):
        args.append((RESOURCES[i % len(RESOURCES)], HALLUCINATED_ARGS[(i * 7) % len(HALLUCINATED_ARGS)]))
    for i in range(17):
        args.append(DEPRECATED_ARGS[i % len(DEPRECATED_ARGS)])
    blocks = []
    for i in range(102):
        blocks.append((RESOURCES[(i * 5) % len(RESOURCES)], HALLUCINATED_BLOCKS[i % len(HALLUCINATED_BLOCKS)]))
    blocks.append(DEPRECATED_BLOCKS[0])
    blocks.append(DEPRECATED_BLOCKS[1])
    resources = [NONEXISTENT_RESOURCES[i % len(NONEXISTENT_RESOURCES)] for i in range(44)]
    rng.shuffle(args)
    rng.shuffle(blocks)
    return args, blocks, resources


def per_script_counts():
    # 315 scripts, 774 stanzas, median 2, max 17.
    hist = {1: 122, 2: 84, 3: 45, 4: 28, 5: 15, 6: 9, 7: 4, 8: 3, 9: 2, 10: 1, 11: 1, 17: 1}
    counts = []
    for k, n in sorted(hist.items()):
        counts.extend([k] * n)
    assert len(counts) == 315 and sum(counts) == 774 and max(counts) == 17
    return counts


def write_logs():
    rng = random.Random(458)
    kinds = []
    for kind, n in LABEL_COUNTS:
        kinds.extend([kind] * n)
    rng.shuffle(kinds)
    args, blocks, resources = element_pools(rng)
    counts = per_script_counts()
    rng.shuffle(counts)
    out = os.path.join(FIX, "baseline_logs")
    os.makedirs(out, exist_ok=True)
    for f in os.listdir(out):
        os.remove(os.path.join(out, f))
    pos = 0
    for s, n in enumerate(counts):
        boxed = s % 3 == 0
        lines = ["Initializing the backend...", "Initializing provider plugins...",
                 "- Finding hashicorp/aws versions matching \"~> 5.0\"...", ""]
        for _ in range(n):
            kind = kinds[pos]
            pos += 1
            if kind == "unsupported_arg":
                body = stanza(kind, rng, args.pop())
            elif kind == "unsupported_block":
                body = stanza(kind, rng, blocks.pop())
            elif kind == "bad_resource_type":
                body = stanza(kind, rng, resources.pop())
            else:
                body = stanza(kind, rng)
            if boxed:
                lines.append("╷")
                lines.extend(("│ " + l) if l else "│" for l in body)
                lines.append("╵")
            else:
                lines.extend(body)
                lines.append("")
        if s % 11 == 0:
            lines.extend(["Warning: Argument is deprecated", "",
                          "Use the aws_s3_bucket_acl resource instead.", ""])
        with open(os.path.join(out, "s%03d.log" % (s + 1)), "w") as f:
            f.write("\n".join(lines) + "\n")
    assert pos == 774
    expected = {k: n for k, n in LABEL_COUNTS}
    with open(os.path.join(out, "EXPECTED.json"), "w") as f:
        json.dump({"scripts": 315, "stanzas": 774, "labels": expected}, f, indent=2, sort_keys=True)
        f.write("\n")


# --------------------------------------------------------------------------
# Changelog
# --------------------------------------------------------------------------

def write_changelog():
    out = os.path.join(FIX, "changelog")
    os.makedirs(out, exist_ok=True)
    lines = ["<!-- markdownlint-disable first-line-heading no-duplicate-heading -->", "",
             "## 5.98.0 (Unreleased)", "",
             "BUG FIXES:", "",
             "* resource/aws_s3_bucket: Fix `acl` drift detection", "",
             "## 5.31.0 (December 15, 2023)", "",
             "NOTES:", "",
             # deprecations after the cutoff never count
             "* resource/aws_instance: The `enable_monitoring` argument is deprecated",
             "* resource/aws_lambda_function: `log_retention` has been deprecated",
             "* resource/aws_kinesis_stream: `logging_config` block is deprecated", "",
             "## 5.0.0 (May 25, 2023)", "",
             "BREAKING CHANGES:", ""]
    for res, arg in DEPRECATED_ARGS:
        lines.append("* resource/%s: Remove deprecated `%s` argument ([#30966](https://github.com/hashicorp/terraform-provider-aws/issues/30966))" % (res, arg))
    lines.append("* resource/%s: The deprecated `%s` block has been removed" % DEPRECATED_BLOCKS[0])
    lines += ["", "ENHANCEMENTS:", "",
              # mentions without the deprecation keyword
              "* resource/aws_db_instance: Add `enable_logging` argument",
              "* resource/aws_s3_bucket: Add `encryption` documentation",
              # whole-token trap: name_prefix must not match `name`
              "* resource/aws_lb: Deprecated `name_prefix` handling for `access_logs_enabled_v2`", "",
              "## 4.67.0 (May 12, 2023)", "",
              "NOTES:", "",
              "* resource/%s: The `%s` block is deprecated, use the aws_s3_bucket_server_side_encryption_configuration resource instead" % DEPRECATED_BLOCKS[1],
              # second mention of an already-deprecated element
              "* resource/aws_s3_bucket: `acl` is deprecated, use the aws_s3_bucket_acl resource instead", "",
              "## 4.0.0 (February 10, 2022)", "",
              "FEATURES:", "",
              "* **New Resource:** `aws_s3_bucket_acl`",
              "* resource/aws_route53_record: Add `set_identifier` support for latency routing", "",
              "## 3.0.0 (July 31, 2020)", "",
              "* resource/aws_instance: Add `network_interface_id` argument", ""]
    with open(os.path.join(out, "CHANGELOG.md"), "w") as f:
        f.write("\n".join(lines))


# --------------------------------------------------------------------------
# 20-case prompt set
# --------------------------------------------------------------------------

PROMPTS = [
    "Create an S3 bucket named my-logs with versioning enabled.",
    "Create a VPC with CIDR 10.0.0.0/16 and one public subnet.",
    "Launch an EC2 instance in a subnet of a new VPC.",
    "Create a CodeBuild project that publishes secondary artifacts to S3.",
    "Create a security group allowing inbound HTTPS.",
    "Create an S3 bucket with server-side encryption using KMS.",
    "Create a subnet in VPC vpc-123 with CIDR 10.0.1.0/24.",
    "Create an EC2 instance of type t3.micro tagged web.",
    "Create a CodeBuild project with a GitHub source.",
    "Create a security group for a database allowing port 5432 from the VPC.",
    "Create a private S3 bucket with object lock.",
    "Create two subnets in different availability zones.",
    "Launch an EC2 instance with a 20 GB root volume.",
    "Create a VPC with DNS hostnames enabled.",
    "Create a CodeBuild project with environment variables.",
    "Create an S3 bucket that blocks all public access.",
    "Create a security group with egress restricted to 443.",
    "Create an EC2 instance with detailed monitoring.",
    "Create a subnet that maps public IPs on launch.",
    "Create a VPC and an internet gateway.",
]


def write_prompts():
    out = os.path.join(FIX, "prompts20")
    for i, text in enumerate(PROMPTS):
        case = os.path.join(out, "case%02d" % (i + 1))
        os.makedirs(case, exist_ok=True)
        marker = "versioning" if "versioning" in text else "aws_"
        with open(os.path.join(case, "prompt.txt"), "w") as f:
            f.write(text + "\n")
        with open(os.path.join(case, "policy.rego"), "w") as f:
            f.write("package terraform\n\nimport rego.v1\n\ndefault allow := false\n\n"
                    "allow if {\n\tsome r in input.resource_changes\n\tcontains(r.type, \"%s\")\n}\n" % marker)


if __name__ == "__main__":
    write_outcomes()
    write_logs()
    write_changelog()
    write_prompts()
    print("fixtures written to", FIX)
