#pragma once

#include "pomdpq/belief.hpp"
#include "pomdpq/format.hpp"
#include "pomdpq/generators.hpp"
#include "pomdpq/graph.hpp"
#include "pomdpq/mdp.hpp"
#include "pomdpq/model.hpp"
#include "pomdpq/product.hpp"
#include "pomdpq/qual_pomdp.hpp"
#include "pomdpq/rational.hpp"
#include "pomdpq/simulate.hpp"
#include "pomdpq/strategy.hpp"
