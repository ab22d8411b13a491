#include "selfgrav/constants.hpp"

#include "selfgrav/errors.hpp"

namespace selfgrav {

ConstantsSet codata_constants() {
  return ConstantsSet{6.674e-11, 1.0546e-34, 9.274e-24, 2.0, "codata"};
}

ConstantsSet paper_constants() {
  ConstantsSet c = codata_constants();
  c.hbar = 1.00e-34;
  c.name = "paper";
  return c;
}

ConstantsSet constants_by_name(const std::string& name) {
  if (name == "paper") return paper_constants();
  if (name == "codata") return codata_constants();
  throw ValidationError("unknown constants set '" + name +
                        "' (expected 'paper' or 'codata')");
}

std::vector<std::string> constants_names() { return {"paper", "codata"}; }

}  // namespace selfgrav
