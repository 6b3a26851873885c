import numpy as np
import pytest

from splatflow.numerics import (
    AdamState,
    SeedStream,
    ShapeError,
    Tensor,
    adam_step,
    backward,
    max_relative_error,
    no_grad,
    ops,
    parameter,
    zero_grads,
)


def rand_param(rng, *shape):
    return parameter(rng.standard_normal(shape))


class TestForwardOps:
    def test_matmul_identity(self):
        out = ops.matmul(Tensor([[1.0, 0.0], [0.0, 1.0]]), Tensor([[3.0], [4.0]]))
        assert np.array_equal(out.data, [[3.0], [4.0]])

    def test_softmax_symmetry(self):
        out = ops.softmax(Tensor([0.0, 0.0, 0.0]))
        assert np.allclose(out.data, [1 / 3, 1 / 3, 1 / 3])

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        out = ops.softmax(Tensor(rng.standard_normal((17, 9)) * 5), axis=-1)
        assert np.abs(out.data.sum(axis=-1) - 1.0).max() < 1e-9

    def test_silu_at_zero(self):
        assert ops.silu(Tensor(0.0)).item() == 0.0

    def test_shape_mismatch_reports_shapes(self):
        with pytest.raises(ShapeError) as ei:
            ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 5))))
        assert "(2, 3)" in str(ei.value) and "(4, 5)" in str(ei.value)

    def test_matmul_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


class TestBackward:
    def test_sum_of_squares(self):
        x = parameter([1.0, 2.0, 3.0])
        loss = ops.sum(ops.mul(x, x))
        backward(loss)
        assert np.array_equal(x.grad, [2.0, 4.0, 6.0])

    def test_l1_sign_rule(self):
        x = parameter([2.0])
        loss = ops.sum(ops.abs(ops.sub(x, Tensor([5.0]))))
        backward(loss)
        assert np.array_equal(x.grad, [-1.0])

    def test_non_scalar_loss_rejected(self):
        x = parameter([1.0, 2.0])
        with pytest.raises(ValueError):
            backward(ops.mul(x, x))

    def test_mlp_matches_finite_differences(self):
        # Random 3-layer MLP with 17 parameters total.
        rng = np.random.default_rng(11)
        w1 = rand_param(rng, 2, 3)   # 6
        b1 = rand_param(rng, 3)      # 3
        w2 = rand_param(rng, 3, 2)   # 6
        b2 = rand_param(rng, 2)      # 2
        params = [w1, b1, w2, b2]
        assert sum(p.size for p in params) == 17
        x = Tensor(rng.standard_normal((4, 2)))

        def f():
            h = ops.silu(ops.linear(x, w1, b1))
            y = ops.linear(h, w2, b2)
            return ops.mean(ops.mul(y, y))

        assert max_relative_error(f, params, h=1e-5) < 1e-4

    def test_backward_bitwise_deterministic(self):
        rng = np.random.default_rng(5)
        data = [rng.standard_normal((6, 6)) for _ in range(3)]

        def run():
            a = parameter(data[0].copy())
            b = parameter(data[1].copy())
            x = Tensor(data[2].copy())
            h = ops.softmax(ops.matmul(x, a), axis=-1)
            y = ops.layer_norm(ops.matmul(h, b), parameter(np.ones(6)), parameter(np.zeros(6)))
            backward(ops.sum(ops.mul(y, y)))
            return a.grad.copy(), b.grad.copy()

        ga1, gb1 = run()
        ga2, gb2 = run()
        assert np.array_equal(ga1, ga2) and np.array_equal(gb1, gb2)

    def test_reused_tensor_accumulates(self):
        x = parameter([3.0])
        loss = ops.sum(ops.add(ops.mul(x, x), x))
        backward(loss)
        assert np.allclose(x.grad, [7.0])

    def test_no_grad_suppresses_graph(self):
        x = parameter([1.0])
        with no_grad():
            y = ops.mul(x, x)
        assert y.node is None and not y.requires_grad


OP_CASES = {
    "add": lambda a, b: ops.add(a, b),
    "sub": lambda a, b: ops.sub(a, b),
    "mul": lambda a, b: ops.mul(a, b),
    "div": lambda a, b: ops.div(a, ops.add(ops.mul(b, b), 0.5)),
    "matmul": lambda a, b: ops.matmul(a, b),
    "exp": lambda a, b: ops.exp(a),
    "log": lambda a, b: ops.log(ops.add(ops.mul(a, a), 0.3)),
    "sqrt": lambda a, b: ops.sqrt(ops.add(ops.mul(a, a), 0.3)),
    "abs": lambda a, b: ops.abs(ops.add(a, 0.1)),
    "pow": lambda a, b: ops.pow(ops.add(ops.mul(a, a), 0.5), 1.7),
    "sigmoid": lambda a, b: ops.sigmoid(a),
    "silu": lambda a, b: ops.silu(a),
    "softmax": lambda a, b: ops.softmax(a, axis=-1),
    "reshape": lambda a, b: ops.reshape(a, (2, 8)),
    "transpose": lambda a, b: ops.transpose(a, (1, 0)),
    "sum_axis": lambda a, b: ops.sum(a, axis=0),
    "mean_axis": lambda a, b: ops.mean(a, axis=1, keepdims=True),
    "cumsum": lambda a, b: ops.cumsum(a, axis=0),
    "take": lambda a, b: ops.take(a, np.array([3, 0, 0, 2]), axis=0),
    "index": lambda a, b: a[1:3, ::2],
    "concat": lambda a, b: ops.concat([a, b], axis=1),
    "where": lambda a, b: ops.where(np.arange(4)[:, None] % 2 == 0, a, b),
    "minimum": lambda a, b: ops.minimum(a, ops.add(b, 0.05)),
    "maximum": lambda a, b: ops.maximum(a, ops.add(b, 0.05)),
    "layer_norm": None,
    "rms_norm": None,
    "attention": None,
    "l1": lambda a, b: ops.l1_distance(a, b),
}


@pytest.mark.parametrize("name", sorted(OP_CASES))
def test_op_gradients_match_finite_differences(name):
    # Spec invariant: 10 random evaluation points per op, rel err < 1e-4.
    for trial in range(10):
        rng = np.random.default_rng(hash(name) % (2**32) + trial)
        a = rand_param(rng, 4, 4)
        b = rand_param(rng, 4, 4)
        if name == "layer_norm":
            g, be = rand_param(rng, 4), rand_param(rng, 4)
            f = lambda: ops.sum(ops.mul(ops.layer_norm(a, g, be), Tensor(rng_fixed)))
            rng_fixed = rng.standard_normal((4, 4))
            tensors = [a, g, be]
        elif name == "rms_norm":
            g = rand_param(rng, 4)
            rng_fixed = rng.standard_normal((4, 4))
            f = lambda: ops.sum(ops.mul(ops.rms_norm(a, g), Tensor(rng_fixed)))
            tensors = [a, g]
        elif name == "attention":
            q = rand_param(rng, 1, 4, 4)
            k = rand_param(rng, 1, 4, 4)
            v = rand_param(rng, 1, 4, 4)
            rng_fixed = rng.standard_normal((1, 4, 4))
            f = lambda: ops.sum(ops.mul(ops.attention(q, k, v, n_heads=2), Tensor(rng_fixed)))
            tensors = [q, k, v]
        else:
            build = OP_CASES[name]
            rng_fixed = None
            weight = rng.standard_normal(np.shape(build(a, b).data))

            def f(build=build, weight=weight):
                return ops.sum(ops.mul(build(a, b), Tensor(weight)))

            tensors = [a, b]
        assert max_relative_error(f, tensors, h=1e-5) < 1e-4, f"op {name}, trial {trial}"


class TestAdam:
    def make(self, value):
        p = parameter(np.array(value))
        return {"w": p}, p

    def test_zero_grads_leave_params(self):
        params, p = self.make([1.0, -2.0])
        st = AdamState.init(params)
        p.grad = np.zeros(2)
        adam_step(params, st, lr=0.1)
        assert np.array_equal(p.data, [1.0, -2.0]) and st.step == 1

    def test_descent_direction(self):
        params, p = self.make([1.0])
        st = AdamState.init(params)
        p.grad = 2.0 * p.data  # f(w) = w^2
        adam_step(params, st, lr=0.1)
        assert p.data[0] < 1.0

    def test_quadratic_convergence(self):
        # 200 steps on f(w) = (w - 3)^2 starting from 0.
        params, p = self.make([0.0])
        st = AdamState.init(params)
        for _ in range(200):
            zero_grads([p])
            w = p
            loss = ops.sum(ops.mul(ops.sub(w, 3.0), ops.sub(w, 3.0)))
            backward(loss)
            adam_step(params, st, lr=0.1)
        assert abs(p.data[0] - 3.0) < 0.05

    def test_nan_grad_skips_step(self):
        params, p = self.make([1.0])
        st = AdamState.init(params)
        p.grad = np.array([np.nan])
        adam_step(params, st, lr=0.1)
        assert st.skipped == 1 and st.step == 0 and p.data[0] == 1.0


class TestSeedStream:
    def test_determinism(self):
        a = SeedStream(42).child("x").normal((5,))
        b = SeedStream(42).child("x").normal((5,))
        assert np.array_equal(a, b)

    def test_child_independence(self):
        root = SeedStream(42)
        a = root.child("a").normal((100,))
        b = root.child("b").normal((100,))
        assert not np.allclose(a, b)

    def test_sibling_isolation(self):
        # Drawing from one child must not perturb another.
        r1 = SeedStream(7)
        _ = r1.child("noise").normal((50,))
        x1 = r1.child("data").normal((5,))
        r2 = SeedStream(7)
        x2 = r2.child("data").normal((5,))
        assert np.array_equal(x1, x2)
