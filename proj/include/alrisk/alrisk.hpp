#pragma once

//! Umbrella header for the alrisk toolkit: pool-based active learning
//! with kernel-estimated local risk, batch selection strategies, and a
//! seeded learning-curve experiment harness.

#include <alrisk/classifier.hpp>
#include <alrisk/config.hpp>
#include <alrisk/dataset.hpp>
#include <alrisk/experiment.hpp>
#include <alrisk/local_risk.hpp>
#include <alrisk/manifest.hpp>
#include <alrisk/random.hpp>
#include <alrisk/runner.hpp>
#include <alrisk/selection.hpp>
#include <alrisk/selftest.hpp>
#include <alrisk/svg_plot.hpp>
