#pragma once

#include "relipop/coupling.hpp"
#include "relipop/fixed_size.hpp"
#include "relipop/graph.hpp"
#include "relipop/matrix_tree.hpp"
#include "relipop/oracle.hpp"
#include "relipop/parse.hpp"
#include "relipop/popping.hpp"
#include "relipop/reliability.hpp"
#include "relipop/repair.hpp"
#include "relipop/rng.hpp"
#include "relipop/scc.hpp"
#include "relipop/util.hpp"
