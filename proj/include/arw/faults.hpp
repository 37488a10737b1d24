#pragma once

// Process-wide fault switches used by the verification suite to prove that
// its checks can fail. Never set outside of verification runs.

namespace arw::faults {

enum class Fault {
  none,
  // Grid evaluation drops the (a - i b)/2 split and the conjugate partner.
  frequency_placement,
};

void inject(Fault fault);
Fault active();

class Scoped {
 public:
  explicit Scoped(Fault fault) { inject(fault); }
  ~Scoped() { inject(Fault::none); }
  Scoped(const Scoped&) = delete;
  Scoped& operator=(const Scoped&) = delete;
};

}  // namespace arw::faults
