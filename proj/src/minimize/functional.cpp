#include "l1rom/minimize.hpp"

namespace l1rom::minimize {

void Functional::validate() const {
  const bool pairing_ok = (kind == Norm::L2 && backend == Backend::QR) ||
                          (kind == Norm::Huber && backend == Backend::IRLS) ||
                          (kind == Norm::L1 && (backend == Backend::LP || backend == Backend::IRLS));
  if (!pairing_ok) throw ConfigInvalid("functional: backend does not match norm " + name());
  if (!(eta >= 0.0)) throw ConfigInvalid("functional: eta must be >= 0");
  if (q != 1 && q != 2) throw ConfigInvalid("functional: regularizer index q must be 1 or 2");
  if (!(huber_eps2 > 0.0)) throw ConfigInvalid("functional: huber_eps2 must be > 0");
}

std::string Functional::name() const {
  switch (kind) {
    case Norm::L2:
      return "l2";
    case Norm::L1:
      return backend == Backend::LP ? "l1lp" : "l1irls";
    case Norm::Huber:
      return "huber";
  }
  return "unknown";
}

Functional parse_functional(const std::string& token) {
  if (token == "l2") return Functional::l2();
  if (token == "l1lp") return Functional::l1_lp();
  if (token == "l1irls") return Functional::l1_irls();
  if (token == "huber") return Functional::huber();
  throw ConfigInvalid("unknown functional '" + token + "'");
}

}  // namespace l1rom::minimize
