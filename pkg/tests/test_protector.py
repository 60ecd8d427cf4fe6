import base64
import hashlib
import re

import pytest
from hypothesis import given, strategies as st

from helpers import FIXTURE_NAMES, ROOT, manifest, plain_output, protected, run_files
from oracles import brute_closed_hash
from routeguard import router
from routeguard.canon import SourceFile, canonicalize, file_hash
from routeguard.cryptobox import seeded_source
from routeguard.errors import ConfigError
from routeguard.minilang import parse
from routeguard.protector import RouterConfig, emit_config, load_protected, parse_config, protect

DATA = ROOT / "tests" / "data"


def src(file_id, text):
    return SourceFile(file_id, f"{file_id}.ml", text)


def two_file():
    return parse(
        [src("main", "fn main() { print(Util.add(1, 2)); }"), src("util", "fn add(a: Int, b: Int) -> Int { return a + b; }")],
        "main.main",
    )


def test_two_file_counts():
    pp = protect(two_file(), rng=seeded_source(0))
    assert pp.descriptor_count == 1
    assert len(pp.config.closed_hashes) == 2 and list(pp.config.nonces) == ["util"]
    assert emit_config(pp.config).count("\nnonce ") == 1


def test_no_plaintext_descriptors_remain():
    pp = protected("keepass")
    for sf in pp.files:
        for lit in re.findall(r'forward_call\("([^"]*)"', sf.text):
            raw = base64.b64decode(lit, validate=True)
            assert len(raw) >= 64 and "-" not in lit


def test_same_seed_is_byte_identical():
    m = manifest("keepass")
    a = protect(m.program(), m.selects, seeded_source(11))
    b = protect(m.program(), m.selects, seeded_source(11))
    assert a.serialize() == b.serialize()


def test_keepass_style_run_matches_original():
    pp = protected("keepass")
    assert sum(1 for sf in pp.files for _ in re.finditer(r"forward_call\(", sf.text)) >= 20
    outcome = run_files(pp.config, pp.files)
    assert outcome.exit_code == 0 and outcome.stdout == plain_output("keepass")


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_hash_fixpoint(name):
    pp = protected(name)
    for sf in pp.files:
        plain = file_hash(sf)
        # recompute the closed hash independently from the emitted bytes
        plains = {f.file_id: file_hash(f) for f in pp.files}
        assert plain == plains[sf.file_id]
        assert brute_closed_hash(sf.file_id, pp.config.deps, plains) == pp.config.closed_hashes[sf.file_id]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_key_absence(name):
    pp = protected(name)
    blob = pp.serialize()
    keys = router.init(pp.config, pp.files).derived_keys
    assert keys
    for key in keys.values():
        assert bytes(key) not in blob
        assert base64.b64encode(bytes(key)) not in blob
        assert bytes(key).hex().encode() not in blob


def test_config_has_no_pre_rewrite_hashes():
    m = manifest("fib")
    pp = protected("fib")
    original = {sf.file_id: file_hash(sf) for sf in m.program().files}
    text = emit_config(pp.config)
    assert base64.b64encode(original["main"]).decode() not in text


def test_golden_config_and_source():
    m = manifest("fib")
    pp = protect(m.program(), m.selects, seeded_source(1))
    assert emit_config(pp.config) == (DATA / "fib_seed1.cfg").read_text()
    main = next(sf for sf in pp.files if sf.file_id == "main")
    assert main.text == (DATA / "fib_seed1_main.ml").read_text()


def test_golden_hashes_recomputed_independently():
    cfg = parse_config((DATA / "fib_seed1.cfg").read_text())
    util = hashlib.sha256(b"fn fib ( n : Int ) -> Int { let a : Int = 0 ; let b : Int = 1 ; let i : Int = 0 ; "
                          b"while i < n { let t : Int = a + b ; a = b ; b = t ; i = i + 1 ; } return a ; }\n").digest()
    main = hashlib.sha256(b'fn main ( ) { print ( forward_call ( "<ENC>" ) ) ; }\n').digest()
    assert cfg.closed_hashes["util"] == util
    assert cfg.closed_hashes["main"] == bytes(a ^ b for a, b in zip(main, util))


def test_write_and_load(tmp_path):
    pp = protected("fib")
    written = pp.write(tmp_path)
    assert sorted(p.name for p in written) == ["main.ml", "router.cfg", "util.ml"]
    config, files = load_protected(tmp_path)
    assert emit_config(config) == emit_config(pp.config)
    assert [f.text for f in files] == [f.text for f in sorted(pp.files, key=lambda f: f.file_id)]


def test_load_missing_config(tmp_path):
    with pytest.raises(ConfigError):
        load_protected(tmp_path)


def test_empty_config():
    assert emit_config(RouterConfig()) == "version 1\n"
    assert parse_config("version 1\n") == RouterConfig()


@pytest.mark.parametrize(
    "text",
    [
        "",
        "version 2\n",
        "version 1\nfile a hash=AAAA\n",
        "version 1\nfile a hash=" + "A" * 44 + "\nfile a hash=" + "A" * 43 + "=\n",
        "version 1\ndep a -> b\n",
        "version 1\nbogus line\n",
        "version 1\nnonce z iv=" + base64.b64encode(bytes(32)).decode() + "\n",
    ],
)
def test_malformed_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_comments_ignored():
    pp = protected("diamond")
    text = "# header\n" + emit_config(pp.config).replace("\n", "  # trailing\n", 1)
    assert parse_config(text) == pp.config


ids = st.sampled_from(["a", "b", "c", "main", "util", "x_1"])
digest = st.binary(min_size=32, max_size=32)


@st.composite
def configs(draw):
    files = draw(st.dictionaries(ids, digest, max_size=6))
    names = sorted(files)
    pairs = [(a, b) for a in names for b in names if a != b]
    deps = draw(st.frozensets(st.sampled_from(pairs), max_size=6)) if pairs else frozenset()
    removed = (draw(st.frozensets(st.sampled_from(pairs), max_size=3)) if pairs else frozenset()) - deps
    nonces = {f: draw(digest) for f in names if draw(st.booleans())}
    entry = draw(st.none() | st.just("main.main"))
    return RouterConfig(files, nonces, deps, removed, entry)


@given(configs())
def test_config_round_trip(cfg):
    assert parse_config(emit_config(cfg)) == cfg
    assert emit_config(parse_config(emit_config(cfg))) == emit_config(cfg)


def test_removed_arcs_still_sealed():
    pp = protected("cyclic")
    assert pp.config.removed == {("odd", "even")}
    odd = next(sf for sf in pp.files if sf.file_id == "odd")
    assert "forward_call(" in odd.text and "Even.is_even" not in odd.text


def test_canonical_hash_stable_under_resealing():
    m = manifest("shapes")
    a = protect(m.program(), m.selects, seeded_source(1))
    b = protect(m.program(), m.selects, seeded_source(2))
    for fa, fb in zip(a.files, b.files):
        assert fa.text != fb.text or "forward_call" not in fa.text
        assert canonicalize(fa).bytes == canonicalize(fb).bytes
