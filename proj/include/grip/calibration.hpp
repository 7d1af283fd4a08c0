#pragma once

#include "grip/errors.hpp"

namespace grip::cal {

// Voltage-divider constants: an FSR in series with a pull-down resistor read
// against a 3.3 V rail.
struct DividerParams {
  double r_pd_ohm = 10000.0;
  double v_supply = 3.3;
};

// Linear voltage-to-force map anchored at full scale.
struct CalibrationCurve {
  double v_max_mv = 1500.0;
  double f_max_n = 10.0;
};

// V_out = R_PD * V_supply / (R_PD + R_FSR), in millivolts. Strictly
// decreasing in r_fsr_ohm.
double divider_voltage_mv(double r_fsr_ohm, const DividerParams& params = {});

// Inverse of divider_voltage_mv. Requires 0 < v_out_mv <= v_supply * 1000.
double inverse_divider_ohm(double v_out_mv, const DividerParams& params = {});

// f = f_max * v / v_max, clamped to [0, f_max].
double estimate_force_n(double voltage_mv, const CalibrationCurve& curve = {});

}  // namespace grip::cal
