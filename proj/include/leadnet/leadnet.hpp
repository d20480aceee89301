#pragma once

#include <leadnet/dynamics.hpp>
#include <leadnet/metrics.hpp>
#include <leadnet/network.hpp>
#include <leadnet/params.hpp>
#include <leadnet/rng.hpp>
#include <leadnet/sweep.hpp>
