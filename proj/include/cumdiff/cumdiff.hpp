#ifndef CUMDIFF_CUMDIFF_HPP_
#define CUMDIFF_CUMDIFF_HPP_

#include "cumdiff/error.hpp"
#include "cumdiff/summation.hpp"
#include "cumdiff/core.hpp"
#include "cumdiff/random.hpp"
#include "cumdiff/significance.hpp"
#include "cumdiff/paired.hpp"
#include "cumdiff/subfull.hpp"
#include "cumdiff/perturb.hpp"
#include "cumdiff/twosample.hpp"
#include "cumdiff/reliability.hpp"
#include "cumdiff/ingest.hpp"
#include "cumdiff/report.hpp"
#include "cumdiff/brfss.hpp"

#endif  // CUMDIFF_CUMDIFF_HPP_
