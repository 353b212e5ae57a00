#include "confspec/trig_polynomial.hpp"

namespace confspec {

template class TrigPolynomial<Complex>;
template class TrigPolynomial<ExactScalar>;

}  // namespace confspec
