#pragma once

#include "tslice/samples.hpp"

namespace testutil {

using namespace tslice;
using samples::gaussian_mixture;
using samples::random_packet;

} // namespace testutil
