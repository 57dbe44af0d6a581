#pragma once

#include "core.hpp"
#include "fft.hpp"
#include "numerics.hpp"
#include "flow.hpp"
#include "transforms.hpp"
#include "weyl.hpp"
#include "metaplectic.hpp"
#include "potential.hpp"
#include "slicing.hpp"
#include "kernel.hpp"
#include "samples.hpp"
#include "experiments.hpp"
#include "criteria.hpp"
