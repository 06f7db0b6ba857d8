import json
import os
import pathlib
import subprocess

import pytest
from referencing import Registry, Resource

ROOT = pathlib.Path(os.environ.get("GRIDZONES_ROOT", pathlib.Path(__file__).resolve().parents[2]))
DATA = ROOT / "data"
SCHEMAS = ROOT / "schemas"


@pytest.fixture(scope="session")
def registry():
    resources = []
    for path in sorted(SCHEMAS.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources)


@pytest.fixture(scope="session")
def validate(registry):
    from jsonschema import Draft202012Validator

    def check(document, schema_name):
        schema = registry.contents(schema_name)
        Draft202012Validator(schema, registry=registry).validate(document)

    return check


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("GRIDZONES_CLI")
    if not exe:
        pytest.skip("GRIDZONES_CLI not set")

    def run(*args, check=True):
        proc = subprocess.run([exe, *map(str, args)], capture_output=True, text=True)
        if check and proc.returncode != 0:
            raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
        return proc

    return run
