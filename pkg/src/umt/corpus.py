"""Loader for the bundled case-study fixtures.

Each directory under ``fixtures/`` holds a ``fixture.json`` naming its
metamodel files, spec, input and expected output models, parameters and the
exit code ``umt run`` is expected to return.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .metamodel import merge, parse_metamodel
from .model import ModelState, parse_model
from .spec import parse_spec


@dataclass
class Fixture:
    name: str
    path: object
    metamodels: list
    spec: str
    input: str = None
    expected: str = None
    params: dict = field(default_factory=dict)
    exit: int = 0

    def file(self, name):
        return self.path / name

    def text(self, name):
        return (self.path / name).read_text()

    def metamodel(self):
        mms = [parse_metamodel(self.text(m)) for m in self.metamodels]
        return merge(mms) if len(mms) > 1 else mms[0]

    def load(self):
        """(metamodel, spec, input state) ready for planning and running."""
        mm = self.metamodel()
        spec = parse_spec(self.text(self.spec), mm)
        state = parse_model(self.text(self.input), mm) if self.input else ModelState(mm)
        return mm, spec, state

    def expected_state(self, mm):
        return parse_model(self.text(self.expected), mm) if self.expected else None

    def cli_args(self, command, output=None):
        args = [command]
        for m in self.metamodels:
            args += ["-m", str(self.file(m))]
        args += ["-s", str(self.file(self.spec))]
        if self.input:
            args += ["-i", str(self.file(self.input))]
        if output is not None:
            args += ["-o", str(output)]
        for k, v in self.params.items():
            args += ["--param", f"{k}={v}"]
        return args


def fixture_root():
    return resources.files("umt") / "fixtures"


def fixture_names():
    return sorted(p.name for p in fixture_root().iterdir()
                  if p.is_dir() and (p / "fixture.json").is_file())


def load_fixture(name):
    path = fixture_root() / name
    meta = json.loads((path / "fixture.json").read_text())
    return Fixture(name=name, path=path, **meta)
