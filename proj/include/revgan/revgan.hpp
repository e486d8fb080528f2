#pragma once

#include "revgan/error.hpp"
#include "revgan/rng.hpp"
#include "revgan/rounding.hpp"
#include "revgan/nn/matrix.hpp"
#include "revgan/nn/activation.hpp"
#include "revgan/nn/dense.hpp"
#include "revgan/nn/loss.hpp"
#include "revgan/nn/conv.hpp"
#include "revgan/nn/serialize.hpp"
#include "revgan/dataset.hpp"
#include "revgan/t2c.hpp"
#include "revgan/generator.hpp"
#include "revgan/train.hpp"
#include "revgan/model_io.hpp"
#include "revgan/codec.hpp"
#include "revgan/npid.hpp"
#include "revgan/metrics.hpp"
#include "revgan/experiments.hpp"
#include "revgan/concealment.hpp"
#include "revgan/chainsim.hpp"
