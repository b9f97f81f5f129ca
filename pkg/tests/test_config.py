import pytest

from cuntzkit import config as cfg
from cuntzkit.dynamics import SystemKind

BASE = """spec_version = 1
name = "t"

[system]
kind = "CircleMonomial"
N = 2

[pipeline]
stages = ["decompose", "build-sections", "verify-all"]

[truncation]
sizes = [4, 8]
"""


def test_minimal_config():
    c = cfg.loads(BASE, "t.cfg")
    assert c.system.kind is SystemKind.CIRCLE_MONOMIAL and c.sizes == (4, 8)
    assert c.tolerances == {"exact": 0.0, "closed_form": 1e-8, "quadrature": 1e-6}
    assert c.nodes == 4096


@pytest.mark.parametrize("name", sorted(cfg.shipped_configs()))
def test_shipped_configs_load(name):
    c = cfg.load(cfg.shipped_configs()[name])
    assert c.stages and c.sizes


def test_sizes_must_increase():
    with pytest.raises(cfg.ConfigError) as err:
        cfg.loads(BASE.replace("[4, 8]", "[8, 4]"), "t.cfg")
    e = err.value
    assert e.message == "truncation sizes strictly increasing"
    assert e.field == "truncation.sizes" and e.line == 12
    assert str(e) == "t.cfg:line 12: [truncation.sizes] truncation sizes strictly increasing"


def test_stage_order():
    with pytest.raises(ValueError, match="needs build-polar"):
        cfg.validate_stages(["decompose", "build-transfer"])
    with pytest.raises(ValueError, match="unknown stage"):
        cfg.validate_stages(["decompose", "fly"])
    bad = BASE.replace('"decompose", "build-sections"', '"build-sections", "decompose"')
    with pytest.raises(cfg.ConfigError) as err:
        cfg.loads(bad)
    assert err.value.field == "pipeline.stages" and err.value.line == 9


def test_product_rejects_transfer():
    text = BASE.replace('kind = "CircleMonomial"', 'kind = "ProductShiftRotation"\ntau = 0.6180339887498949').replace(
        '"build-sections"', '"build-sections", "build-polar"'
    )
    with pytest.raises(cfg.ConfigError, match="not available"):
        cfg.loads(text)


@pytest.mark.parametrize(
    "edit, field",
    [
        (("N = 2", "N = 1"), "system.N"),
        (('kind = "CircleMonomial"', 'kind = "ProductShiftRotation"\ntau = 0.25'), "system.tau"),
        (("N = 2", 'N = "two"'), "system.N"),
        (("spec_version = 1", "spec_version = 9"), "spec_version"),
        (('name = "t"', 'name = "t"\ncolour = 3'), "colour"),
        (("[truncation]", "[truncation]\nnodes = 8"), "truncation.nodes"),
        (("[truncation]", "[tolerances]\nfuzzy = 1.0\n[truncation]"), "tolerances.fuzzy"),
        (("[truncation]", "[output]\nformats = [\"pdf\"]\n[truncation]"), "output.formats"),
    ],
)
def test_errors_name_field(edit, field):
    with pytest.raises(cfg.ConfigError) as err:
        cfg.loads(BASE.replace(*edit), "t.cfg")
    assert err.value.field == field
    assert err.value.line is not None


def test_invalid_toml_reports_line():
    with pytest.raises(cfg.ConfigError) as err:
        cfg.loads(BASE.replace("N = 2", "N = = 2"), "t.cfg")
    assert err.value.line is not None
