# from .instance import Instance, make_instance, validate
# from .bounds import upper_bound_terms, lower_bound
