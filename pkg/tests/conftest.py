from synthetic_shapes.fixtures import shape_dataset, small_shape_root  # noqa: F401
