#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "heterodyn/evt.hpp"
#include "heterodyn/filter.hpp"
#include "heterodyn/grid.hpp"
#include "heterodyn/model.hpp"
#include "heterodyn/rng.hpp"
#include "heterodyn/simulate.hpp"
#include "heterodyn/stats.hpp"
#include "heterodyn/transfer.hpp"

namespace heterodyn {

// Numbers are written with %.17g so that identical runs give identical bytes.
std::string format_number(double v);

// "# heterodyn version=... config_hash=... seed=..." (seed as seed:stream_id).
void write_header(std::ostream& os, std::uint64_t config_hash, const SeededStream& seed);

// Each writer emits the header followed by a CSV table. Summary values that
// do not fit the table go into extra "# key=value" comment lines.
void write_validation_csv(std::ostream& os, const ValidationReport& r, std::uint64_t hash, const SeededStream& seed);
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_density_csv(std::ostream& os, const GridDensity& w, std::uint64_t hash, const SeededStream& seed);
void write_spectral_csv(std::ostream& os, const SpectralReport& r, std::span<const double> correlations,
                        std::uint64_t hash, const SeededStream& seed);
void write_stability_csv(std::ostream& os, const StabilityReport& r, std::uint64_t hash, const SeededStream& seed);
void write_clt_csv(std::ostream& os, const CltReport& r, std::uint64_t hash, const SeededStream& seed);
void write_ld_csv(std::ostream& os, const LdReport& r, std::uint64_t hash, const SeededStream& seed);
void write_concentration_csv(std::ostream& os, const ConcentrationReport& r, std::uint64_t hash,
                             const SeededStream& seed);
void write_gumbel_csv(std::ostream& os, const GumbelReport& r, std::uint64_t hash, const SeededStream& seed);
void write_poisson_csv(std::ostream& os, const PoissonReport& r, std::uint64_t hash, const SeededStream& seed);
void write_repp_csv(std::ostream& os, const ReppReport& r, std::uint64_t hash, const SeededStream& seed);
void write_modulation_csv(std::ostream& os, const ModulationReport& r, std::uint64_t hash, const SeededStream& seed);

}  // namespace heterodyn
