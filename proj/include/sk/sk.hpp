#pragma once

#include "sk/archive.hpp"
#include "sk/bench.hpp"
#include "sk/common.hpp"
#include "sk/continuous.hpp"
#include "sk/datasets.hpp"
#include "sk/dense.hpp"
#include "sk/kernels.hpp"
#include "sk/losses.hpp"
#include "sk/neighbors.hpp"
#include "sk/optim.hpp"
#include "sk/selection.hpp"
#include "sk/sparse.hpp"
#include "sk/table.hpp"
#include "sk/train.hpp"
#include "sk/transport.hpp"
