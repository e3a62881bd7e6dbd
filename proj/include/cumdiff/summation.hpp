#ifndef CUMDIFF_SUMMATION_HPP_
#define CUMDIFF_SUMMATION_HPP_

#include <cmath>
#include <span>

namespace cumdiff {

// Neumaier's variant of Kahan summation. Running sums over a few hundred
// thousand survey rows keep their last digits this way.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

}  // namespace cumdiff

#endif  // CUMDIFF_SUMMATION_HPP_
