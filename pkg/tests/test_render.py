import re

import numpy as np
import pytest

from apfrrt.apf import PotentialParams, resolve_for
from apfrrt.planner import Tree, plan
from apfrrt.render import RenderSpec, parse_layers, quiver_field, render_svg
from apfrrt.scenario import load_shipped, parse_scenario
from tests.test_scenario import BASIC


@pytest.fixture(scope="module")
def solved():
    s = parse_scenario(BASIC)
    env = s.environment()
    r = plan(env, s.planner_params(s.profile("plain"), seed=0))
    assert r.solved
    return env, r


def test_empty_tree(solved):
    env, _ = solved
    tree = Tree.for_env(env)
    tree.add_root(env.start)
    svg = render_svg(env, tree, None)
    assert 'class="tree"' not in svg and 'class="path"' not in svg
    assert svg.count('class="start"') == 1 and svg.count('class="goal"') == 1
    assert svg.count('class="permeable"') == 1 and svg.count('class="impermeable"') == 1


def test_byte_identical(solved):
    env, r = solved
    spec = RenderSpec(400, 300, parse_layers("world,tree,path,quiver"))
    a = render_svg(env, r.tree, r.path, PotentialParams(), spec)
    b = render_svg(env, r.tree, r.path, PotentialParams(), spec)
    assert a == b
    assert a.count('class="tree"') == len(r.tree) - 1
    assert 'width="400" height="300"' in a


def test_layers_select_content(solved):
    env, r = solved
    svg = render_svg(env, r.tree, r.path, PotentialParams(), RenderSpec(layers=parse_layers("path")))
    assert 'class="path"' in svg and 'class="permeable"' not in svg and 'class="quiver"' not in svg
    with pytest.raises(ValueError):
        parse_layers("world,heatmap")


def test_quiver_zero_at_goal(solved):
    env, _ = solved
    field = quiver_field(env, resolve_for(PotentialParams(), env), 5)
    assert len(field) == 26
    p, f = field[-1]
    assert p == tuple(env.goal) and np.all(f == 0)
    # elsewhere the attraction points home
    p, f = field[0]
    assert float(np.dot(f, np.asarray(env.goal) - p)) > 0


def test_numbers_two_decimals(solved):
    env, r = solved
    svg = render_svg(env, r.tree, r.path)
    nums = re.findall(r'(?:x1|y1|x2|y2|cx|cy)="([^"]+)"', svg)
    assert nums and all(re.fullmatch(r"-?\d+\.\d\d", n) for n in nums)


def test_canvas_too_small():
    with pytest.raises(ValueError):
        RenderSpec(99, 200)


def test_arm_render_and_quiver_rejected():
    s = load_shipped("arm")
    env = s.environment()
    svg = render_svg(env, None, [env.start, env.goal])
    assert 'class="arm-start"' in svg and 'class="arm-goal"' in svg
    with pytest.raises(ValueError):
        render_svg(env, None, None, PotentialParams(), RenderSpec(layers=parse_layers("quiver")))
