#ifndef VCHAIN_VCHAIN_HPP
#define VCHAIN_VCHAIN_HPP

#include "vchain/allocation.hpp"
#include "vchain/eval_bench.hpp"
#include "vchain/icio.hpp"
#include "vchain/inference.hpp"
#include "vchain/ingest.hpp"
#include "vchain/linkset_io.hpp"
#include "vchain/specialization.hpp"
#include "vchain/tuning.hpp"

#endif  // VCHAIN_VCHAIN_HPP
