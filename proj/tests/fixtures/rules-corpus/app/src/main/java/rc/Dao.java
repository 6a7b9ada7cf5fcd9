package rc;

import javax.persistence.EntityManager;
import com.fasterxml.jackson.databind.ObjectMapper;

public class Dao {
    private EntityManager em;
    private Object lock;
    private int hits;

    public void read(HttpRequest req) {
        ObjectMapper mapper = new ObjectMapper();
        ObjectMapperX spare = new ObjectMapperX();
        for (int i = 0; i < 8; i++) {
            em.createQuery("select x from items x");
        }
        em.find(req);
        synchronized (lock) {
            hits = hits + 1;
        }
        mapper.readTree(req);
        spare.reset();
    }
}
