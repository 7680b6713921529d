#pragma once

#include "reflex_smas/similarity.hpp"
#include "reflex_smas/stochastic.hpp"
#include "reflex_smas/schema.hpp"
#include "reflex_smas/fixtures.hpp"
#include "reflex_smas/agent_engine.hpp"
#include "reflex_smas/meta_simulation.hpp"
#include "reflex_smas/evaluation.hpp"
