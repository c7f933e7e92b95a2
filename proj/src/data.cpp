#include "mgcp/data.hpp"

#include <set>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

int Dataset::index_of(int id) const {
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    if (outputs[k].id == id) return static_cast<int>(k);
  }
  throw ArgumentError("no output with id " + std::to_string(id));
}

void Dataset::validate() const {
  std::set<int> ids;
  const Index dim = input_dim();
  for (const OutputSeries& s : outputs) {
    if (!ids.insert(s.id).second) throw ArgumentError("duplicate output id " + std::to_string(s.id));
    if (s.X.cols() != dim) throw ArgumentError("output " + std::to_string(s.id) + " has inconsistent input dimension");
    if (s.X.rows() != s.y.size()) {
      throw ArgumentError("output " + std::to_string(s.id) + ": rows(X) != |y|");
    }
  }
  if (!standardization.empty() && standardization.size() != outputs.size()) {
    throw ArgumentError("standardization record must cover every output");
  }
}

}  // namespace mgcp
