#include "grip/calibration.hpp"

#include <algorithm>
#include <string>

namespace grip::cal {

namespace {

void check_params(const DividerParams& p) {
  if (!(p.r_pd_ohm > 0.0) || !(p.v_supply > 0.0)) {
    throw Error("divider params must be positive");
  }
}

}  // namespace

double divider_voltage_mv(double r_fsr_ohm, const DividerParams& params) {
  check_params(params);
  if (r_fsr_ohm < 0.0) {
    throw NegativeResistance("FSR resistance must be >= 0 ohm");
  }
  return 1000.0 * params.r_pd_ohm * params.v_supply /
         (params.r_pd_ohm + r_fsr_ohm);
}

double inverse_divider_ohm(double v_out_mv, const DividerParams& params) {
  check_params(params);
  const double supply_mv = params.v_supply * 1000.0;
  if (!(v_out_mv > 0.0) || v_out_mv > supply_mv) {
    throw OutOfRangeVoltage("divider voltage must be in (0, " +
                            std::to_string(supply_mv) + "] mV");
  }
  return params.r_pd_ohm * (supply_mv - v_out_mv) / v_out_mv;
}

double estimate_force_n(double voltage_mv, const CalibrationCurve& curve) {
  if (!(curve.v_max_mv > 0.0) || !(curve.f_max_n > 0.0)) {
    throw Error("calibration curve constants must be positive");
  }
  const double f = curve.f_max_n * (voltage_mv / curve.v_max_mv);
  return std::clamp(f, 0.0, curve.f_max_n);
}

}  // namespace grip::cal
