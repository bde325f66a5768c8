#pragma once

#include <string>

#include "mzisim/analysis.hpp"
#include "mzisim/report.hpp"

namespace mzisim {

/// Visibility vs delta_L with error bars, fitted lines and the 1/e level.
std::string visibility_plot_svg(const SummaryReport& report);

/// Raw slit-scan trace with the fitted envelope model overlaid.
std::string fringe_plot_svg(const FringeTrace& trace, const EnvelopeFit& fit);

}  // namespace mzisim
