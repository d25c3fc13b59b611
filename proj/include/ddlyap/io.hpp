#pragma once

#include "ddlyap/approx.hpp"
#include "ddlyap/fundamental.hpp"
#include "ddlyap/jumps.hpp"
#include "ddlyap/lyapunov.hpp"
#include "ddlyap/oracle.hpp"
#include "ddlyap/system.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddlyap::io {

using Json = nlohmann::ordered_json;

/// {"n": int, "entries": [{"delay": float | int | {"num","den"}, "A": [[...]]}]}.
/// Integer and {"num","den"} delays are exact; floats are real. Throws ParseError.
DelaySystem parse_system(const Json& j);
DelaySystem parse_system_text(const std::string& text);
DelaySystem load_system(const std::string& path);

Matrix parse_matrix(const Json& j, const std::string& what);
WeightMatrix load_weight(const std::string& path, Index n);

/// {"constant": [..]} or {"pieces": [{"start": s, "value": [..], "slope": [..]}]}.
InitialFunction parse_initial_function(const Json& j, double max_delay, Index n);

std::string format_double(double v);

// CSV writers: comma separated, header row, row-major matrix entries.
/// pre_start adds a leading row for the constant initial segment (e.g. -H).
void write_step_csv(std::ostream& os, const StepMatrixFunction& k, const std::string& label = "K",
                    std::optional<double> pre_start = std::nullopt);
void write_trajectory_csv(std::ostream& os, const std::vector<double>& grid, const Trajectory& x);
void write_lyapunov_csv(std::ostream& os, const PiecewiseAffineMatrixFunction& u, const std::vector<double>& grid);
void write_spectrum_csv(std::ostream& os, const JumpSpectrum& spectrum, Index n);

Json to_json(const StabilityReport& r);
Json to_json(const ResidualReport& r);
Json to_json(const JumpPropertyReport& r);
Json to_json(const CrossCheckReport& r, bool pointwise = false);
Json to_json(const SequenceResult& r);
Json to_json(const Matrix& m);

}  // namespace ddlyap::io
