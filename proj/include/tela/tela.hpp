#pragma once

#include "acceptance.hpp"
#include "analysis.hpp"
#include "automaton.hpp"
#include "bitset.hpp"
#include "budget.hpp"
#include "determinize.hpp"
#include "error.hpp"
#include "hoa.hpp"
#include "limitdet.hpp"
#include "mdp.hpp"
#include "operations.hpp"
#include "randbench.hpp"
#include "transforms.hpp"
