#ifndef SHALLOWTREE_SHALLOWTREE_HPP
#define SHALLOWTREE_SHALLOWTREE_HPP

#include "builder.hpp"
#include "calibrate.hpp"
#include "core.hpp"
#include "experiment.hpp"
#include "io.hpp"
#include "kmeans.hpp"
#include "metrics.hpp"
#include "splitter.hpp"

#endif  // SHALLOWTREE_SHALLOWTREE_HPP
