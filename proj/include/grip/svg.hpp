#pragma once

#include <span>
#include <string>

#include "grip/profiles.hpp"

namespace grip::svg {

struct ChartOptions {
  int width = 960;
  int height = 400;
  std::string title = "grip force profile";
};

// Renders one line per series plus vertical markers at step boundaries.
// Output is deterministic for fixed input: fixed element order, two-decimal
// coordinates.
std::string render_profiles(std::span<const profiles::ProfileSeries> series,
                            const ChartOptions& options = {});

}  // namespace grip::svg
