#pragma once

#include "kesten/error.hpp"
#include "kesten/rng.hpp"
#include "kesten/distributions.hpp"
#include "kesten/process_spec.hpp"
#include "kesten/serialization.hpp"
#include "kesten/processes.hpp"
#include "kesten/estimators.hpp"
#include "kesten/theory.hpp"
#include "kesten/io.hpp"
#include "kesten/runner.hpp"
