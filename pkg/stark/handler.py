try:
    from stark.acshift.post import POST as POST_CURVE
except ImportError:
    from acshift.post import POST as POST_CURVE


def generate_curve(event):
    post = POST_CURVE()
    return post.generate_curve(event)
