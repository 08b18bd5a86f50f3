"""Smoke tests for the sucsim extension: the bound calculators and the
template -> personalize -> lock -> load flow, driven the same way the CLI
drives them."""

import pytest

import sucsim

SEED = "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"


def test_generator_is_reproducible():
    a = sucsim.Trng(SEED, stream=5)
    b = sucsim.Trng(SEED, stream=5)
    assert [a.draw_bits(64) for _ in range(4)] == [b.draw_bits(64) for _ in range(4)]
    assert a.bits_consumed == 256
    c = sucsim.Trng(SEED, stream=6)
    assert c.draw_bits(64) != sucsim.Trng(SEED, stream=5).draw_bits(64)
    with pytest.raises(sucsim.Error):
        sucsim.Trng("zz")


def test_involutive_device_round_trip():
    rng = sucsim.Trng(SEED, stream=1)
    dev = sucsim.forge_instance("i", rng)
    assert dev.kind == "i"
    x = 0x0123456789ABCDEF
    y = dev.encrypt(x)
    assert y != x
    assert dev.decrypt(y) == x
    assert dev.encrypt(y) == x  # the whole cipher is an involution


def test_template_flow(tmp_path):
    rng = sucsim.Trng(SEED, stream=2)
    template = sucsim.build_template("ni", b"application image")
    assert not template.personalized
    assert not template.locked
    assert template.kind == "ni"
    assert {r["kind"] for r in template.regions} == {"sbox_layer", "key_bank", "meta"}

    device_bs, ledger = sucsim.personalize(template, rng)
    assert ledger["entropy_bytes"] == 170
    assert ledger["selection_bits"] == 16 * 21
    assert ledger["key_bits"] == 1024
    assert device_bs.personalized

    locked = sucsim.lock(device_bs)
    assert locked.locked
    with pytest.raises(sucsim.Error):
        sucsim.personalize(locked, rng)

    dev = sucsim.load_device(locked)
    assert dev.kind == "ni"
    assert dev.decrypt(dev.encrypt(42)) == 42

    path = tmp_path / "device.sbt"
    sucsim.save_bitstream(str(path), locked)
    again = sucsim.load_bitstream(str(path))
    assert sucsim.load_device(again).encrypt(7) == dev.encrypt(7)
    assert sucsim.from_bytes(locked.to_bytes()).to_bytes() == locked.to_bytes()


def test_calculators():
    assert sucsim.data_complexity_bounds(30) == (120.0, 120.0)
    ni = sucsim.cardinalities("ni")
    assert abs(ni["class_size_log2"] - 326.4) < 1e-9
    assert ni["key_entropy"] == 1024.0
    assert ni["grover_log2"] == 163.0
    iv = sucsim.cardinalities("i", distinct_layers=16)
    assert abs(iv["cre_total"] - 5350.4) < 1e-9
    assert sucsim.genie_storage_cost(145920, 64) == 8.90625

    pb = sucsim.perfect_bounds(10)
    assert pb["s_max_log2_stirling"] == 8192.0
    assert abs(pb["s_max_log2_exact"] - 8769.006144) < 1e-3
    assert sucsim.perfect_bounds(64)["s_max_log2_exact"] is None

    mq = sucsim.modeling_and_quantum(64, "i")
    assert mq["ccbs_log2"] == 64.0
    assert not mq["meets_classical"]

    with pytest.raises(sucsim.Error):
        sucsim.data_complexity_bounds(0)


def test_sbox_check():
    good = sucsim.sbox_check("c56b90ad3ef84712")
    assert good["bijective"] and good["optimal"]
    assert good["diff_uniformity"] == 4
    assert good["linearity"] == 8
    identity = sucsim.sbox_check("0123456789abcdef")
    assert identity["bijective"] and not identity["optimal"]
    with pytest.raises(ValueError):
        sucsim.sbox_check("123")


def test_avalanche_shape():
    rng = sucsim.Trng(SEED, stream=3)
    rounds = sucsim.avalanche_by_round("i", 1, 10, rng)
    assert len(rounds) == 32
    mean, lo, hi = rounds[-1]
    assert 0 < lo <= mean <= hi <= 64
    control = sucsim.avalanche_by_round("i", 1, 5, rng, control=True)
    assert all(r == (0.0, 0, 0) for r in control)
