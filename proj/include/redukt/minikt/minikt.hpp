#pragma once

#include "redukt/minikt/lexer.hpp"
#include "redukt/minikt/parser.hpp"
#include "redukt/minikt/printer.hpp"
#include "redukt/minikt/syntax.hpp"
