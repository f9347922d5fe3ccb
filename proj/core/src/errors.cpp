#include "kgpilot/errors.hpp"

#include <cstdio>
#include <sstream>

namespace kgpilot {

namespace {

std::string node_message(const std::vector<double>& coords, double psi_modulus, double threshold) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", psi_modulus);
  os << "wave function node: |psi| = " << buf;
  std::snprintf(buf, sizeof(buf), "%.6g", threshold);
  os << " <= threshold " << buf << " at (";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g", coords[i]);
    os << (i ? ", " : "") << buf;
  }
  os << ")";
  return os.str();
}

}  // namespace

NodeError::NodeError(std::vector<double> coords, double psi_modulus, double threshold)
    : Error(node_message(coords, psi_modulus, threshold)),
      coords_(std::move(coords)),
      psi_modulus_(psi_modulus),
      threshold_(threshold) {}

ParseError::ParseError(const std::string& message, std::string field, int line)
    : Error(field.empty() ? (line > 0 ? message + " (line " + std::to_string(line) + ")" : message)
                          : message + " (field '" + field + "'" +
                                (line > 0 ? ", line " + std::to_string(line) : "") + ")"),
      field_(std::move(field)),
      line_(line) {}

}  // namespace kgpilot
