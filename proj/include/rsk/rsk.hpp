// Umbrella header: the whole library in dependency order.

#pragma once

#include <rsk/version.hpp>
#include <rsk/rng.hpp>
#include <rsk/special_math.hpp>
#include <rsk/quadrature.hpp>
#include <rsk/kernels.hpp>
#include <rsk/noise.hpp>
#include <rsk/smoothing.hpp>
#include <rsk/gram_floors.hpp>
#include <rsk/kernel_gd.hpp>
#include <rsk/schedules.hpp>
#include <rsk/mlp.hpp>
#include <rsk/datagen.hpp>
#include <rsk/io_util.hpp>
#include <rsk/config_io.hpp>
#include <rsk/harness.hpp>
#include <rsk/verify.hpp>
