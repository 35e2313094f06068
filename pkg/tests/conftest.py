from importlib import resources

import pytest

from knowhow_dss.modelfile import ModelDocument, load_model


def em_micro_text() -> str:
    return (resources.files("knowhow_dss") / "data/em-micro.model").read_text()


@pytest.fixture(scope="session")
def em_micro() -> ModelDocument:
    return load_model(em_micro_text())


@pytest.fixture(scope="session")
def demo_ws(tmp_path_factory):
    from knowhow_dss.demo import build_demo

    return build_demo(tmp_path_factory.mktemp("demo") / "pack")


@pytest.fixture()
def fresh_demo_ws(tmp_path):
    from knowhow_dss.demo import build_demo

    return build_demo(tmp_path / "pack")
