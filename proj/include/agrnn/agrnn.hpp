#pragma once

#include "agrnn/bptt.hpp"
#include "agrnn/cells.hpp"
#include "agrnn/cost_bench.hpp"
#include "agrnn/experiments.hpp"
#include "agrnn/mnist.hpp"
#include "agrnn/optim.hpp"
#include "agrnn/quantized.hpp"
#include "agrnn/rng.hpp"
#include "agrnn/serialize.hpp"
#include "agrnn/tasks.hpp"
#include "agrnn/tensor.hpp"
#include "agrnn/train.hpp"
