import math

import pytest

from robobench.bus.control_table import (
    CURRENT_UNIT_A,
    GOAL_REGISTER_FOR_MODE,
    MODE_POSITION,
    RADIANS_PER_TICK,
    TICK_CENTER,
    TICKS_PER_REV,
    VELOCITY_UNIT_RAD_S,
    XM_TABLE,
    ControlTable,
    Register,
    amps_from_current_raw,
    current_raw_from_amps,
    rad_s_from_velocity_raw,
    radians_from_ticks,
    ticks_from_radians,
    velocity_raw_from_rad_s,
)
from robobench.errors import ConfigurationError, UsageError


def test_tick_conversions():
    assert radians_from_ticks(TICK_CENTER) == 0.0
    assert ticks_from_radians(0.0) == TICK_CENTER
    assert radians_from_ticks(TICK_CENTER + TICKS_PER_REV) == pytest.approx(2 * math.pi)
    assert ticks_from_radians(math.pi) == TICK_CENTER + TICKS_PER_REV // 2
    # one tick resolution
    assert radians_from_ticks(TICK_CENTER + 1) == pytest.approx(RADIANS_PER_TICK)


def test_tick_roundtrip_within_half_tick(rng):
    for a in rng.uniform(-20.0, 20.0, size=500):
        back = radians_from_ticks(ticks_from_radians(float(a)))
        assert abs(back - float(a)) <= RADIANS_PER_TICK / 2 + 1e-12


def test_unit_scales():
    assert VELOCITY_UNIT_RAD_S == pytest.approx(0.229 * 2 * math.pi / 60)
    assert CURRENT_UNIT_A == pytest.approx(2.69e-3)
    assert rad_s_from_velocity_raw(velocity_raw_from_rad_s(1.0)) == pytest.approx(1.0, abs=VELOCITY_UNIT_RAD_S)
    assert amps_from_current_raw(current_raw_from_amps(1.5)) == pytest.approx(1.5, abs=CURRENT_UNIT_A)


def test_register_encode_decode_signed_and_unsigned():
    assert XM_TABLE.encode("goal_position", -1) == b"\xff\xff\xff\xff"
    assert XM_TABLE.decode("goal_position", b"\xff\xff\xff\xff") == -1
    assert XM_TABLE.encode("torque_enable", 1) == b"\x01"
    with pytest.raises(UsageError):
        XM_TABLE.encode("torque_enable", 256)
    with pytest.raises(UsageError):
        XM_TABLE.encode("torque_enable", -1)
    with pytest.raises(UsageError):
        XM_TABLE.decode("goal_position", b"\x00\x00")


def test_unknown_register_rejected():
    with pytest.raises(ConfigurationError):
        XM_TABLE["no_such_register"]
    assert "goal_position" in XM_TABLE
    assert "no_such_register" not in XM_TABLE


def test_state_registers_are_contiguous():
    # the driver reads current+velocity+position in one span
    cur = XM_TABLE["present_current"]
    vel = XM_TABLE["present_velocity"]
    pos = XM_TABLE["present_position"]
    assert cur.address + cur.size == vel.address
    assert vel.address + vel.size == pos.address
    assert cur.size + vel.size + pos.size == 10


def test_at_lookup():
    reg = XM_TABLE.at(126, 2)
    assert reg is not None and reg.name == "present_current"
    assert XM_TABLE.at(126, 10) is None


def test_goal_register_per_mode():
    assert GOAL_REGISTER_FOR_MODE[MODE_POSITION] == "goal_position"
    for name in GOAL_REGISTER_FOR_MODE.values():
        assert XM_TABLE[name].writable


def test_table_rejects_overlap_and_duplicates():
    with pytest.raises(ConfigurationError):
        ControlTable([Register("a", 0, 4), Register("b", 2, 2)])
    with pytest.raises(ConfigurationError):
        ControlTable([Register("a", 0, 2), Register("a", 4, 2)])
    with pytest.raises(ConfigurationError):
        ControlTable([Register("a", 0, 3)])
    with pytest.raises(ConfigurationError):
        ControlTable([Register("a", -1, 1)])
