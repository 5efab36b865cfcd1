#ifndef HGOF_HGOF_HPP
#define HGOF_HGOF_HPP

#include "hgof/bootstrap.hpp"
#include "hgof/common.hpp"
#include "hgof/fda.hpp"
#include "hgof/io.hpp"
#include "hgof/measures.hpp"
#include "hgof/parallel.hpp"
#include "hgof/rng.hpp"
#include "hgof/simulation.hpp"
#include "hgof/statistic.hpp"

#endif  // HGOF_HGOF_HPP
