#pragma once

#include "potts/chimera.hpp"
#include "potts/embedding.hpp"
#include "potts/instance.hpp"
#include "potts/io.hpp"
#include "potts/onehot.hpp"
#include "potts/orchestrator.hpp"
#include "potts/partition.hpp"
#include "potts/qubo.hpp"
#include "potts/rng.hpp"
#include "potts/sampler.hpp"
